import numpy as np
import pytest

from strongnash.game import Game
from strongnash.hard import gen_block_even

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _three_agent_cells():
    # one 3x3 table (agent 1 rows, agent 2 columns) per action of agent 3
    e = np.eye(3)
    tables = [
        [[e[0], e[1], e[2]], [e[1], e[2], e[0]], [e[2], e[0], e[1]]],
        [[e[1], e[2], e[0]], [e[2], e[0], e[1]], [e[0], e[1], e[2]]],
        [[e[2], e[0], e[1]], [e[0], e[1], e[2]], [e[1], e[2], e[0]]],
    ]
    return np.stack([np.asarray(t) for t in tables], axis=2)


LINE_GAME = Game.from_bimatrix([[3, 0], [1, 2]], [[0, 3], [2, 1]], name="line")
PD = Game.from_bimatrix([[3, 0], [5, 1]], [[3, 5], [0, 1]], name="pd")
COORD = Game.from_bimatrix([[2, 0], [0, 1]], [[2, 0], [0, 1]], name="coordination")
PADDED_LINE_GAME = Game.from_bimatrix(
    [[3, 0, -5, -5], [1, 2, -5, -5], [-5, -5, 5, 0], [-5, -5, 0, 0]],
    [[0, 3, -5, -5], [2, 1, -5, -5], [-5, -5, 0, 0], [-5, -5, 0, 5]],
    name="padded-line",
)
# four cells spanning a parallelogram with an interior mixed NE
PARALLELOGRAM = Game.from_cells([[(1, 2), (3, 1.5)], [(2, 1), (2, 2.5)]], name="parallelogram")
THREE_AGENT = Game.from_cells(_three_agent_cells(), name="three-agent")


@pytest.fixture
def line_game():
    return LINE_GAME


@pytest.fixture
def pd_game():
    return PD


@pytest.fixture
def coord():
    return COORD


@pytest.fixture
def padded_line_game():
    return PADDED_LINE_GAME


@pytest.fixture
def block4():
    return gen_block_even(4)


@pytest.fixture
def parallelogram():
    return PARALLELOGRAM


@pytest.fixture
def three_agent():
    return THREE_AGENT
