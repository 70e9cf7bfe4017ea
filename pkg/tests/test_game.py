import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strongnash.game import (
    DegenerateProfileError,
    Game,
    GameError,
    GameFormatError,
    MixedProfile,
    SupportProfile,
    action_value,
    action_values,
    expected_utility,
    game_from_json,
    game_to_json,
    load_game,
    load_profile,
    restrict,
    save_game,
    save_profile,
    support_of,
)
from strongnash.hard import HardSpec, gen_hard

from conftest import LINE_GAME, PADDED_LINE_GAME


def brute_expected_utility(game, probs):
    total = np.zeros(game.n)
    for idx in np.ndindex(*game.actions):
        w = np.prod([probs[i][a] for i, a in enumerate(idx)])
        total += w * game.payoffs[(slice(None),) + idx]
    return total


def random_game(rng, actions):
    n = len(actions)
    return Game(rng.normal(size=(n,) + tuple(actions)))


def random_profile(rng, actions):
    return MixedProfile(tuple(rng.dirichlet(np.ones(m)) for m in actions))


# -- construction ------------------------------------------------------------

def test_game_shape_and_cells():
    g = LINE_GAME
    assert g.n == 2 and g.actions == (2, 2)
    assert g.cells.tolist() == [[3, 0], [0, 3], [1, 2], [2, 1]]


@pytest.mark.parametrize("bad", [
    np.zeros((1, 2)),            # single player
    np.zeros((2, 2)),            # missing action axes
    np.zeros((3, 2, 2)),         # 3 players, 2 action axes
    np.zeros((2, 0, 2)),         # empty action set
])
def test_game_rejects_bad_shapes(bad):
    with pytest.raises(GameError):
        Game(bad)


def test_game_rejects_non_finite():
    p = np.zeros((2, 2, 2))
    p[0, 1, 1] = np.inf
    with pytest.raises(GameError):
        Game(p)


def test_game_is_immutable():
    with pytest.raises(ValueError):
        LINE_GAME.payoffs[0, 0, 0] = 9.0


def test_profile_validation():
    with pytest.raises(GameError):
        MixedProfile((np.array([0.6, 0.6]), np.array([1.0])))
    with pytest.raises(GameError):
        MixedProfile((np.array([1.1, -0.1]), np.array([1.0])))
    p = MixedProfile((np.array([0.5, 0.5 + 5e-10]), np.array([1.0])))
    assert p.n == 2


def test_support_profile_validation():
    with pytest.raises(GameError):
        SupportProfile(((1, 0), (0,)))
    with pytest.raises(GameError):
        SupportProfile(((), (0,)))
    with pytest.raises(GameError):
        SupportProfile(((0,), (5,))).check(LINE_GAME)


# -- expected utility and action values -------------------------------------------

def test_expected_utility_line_game_sne():
    p = MixedProfile(([0.25, 0.75], [0.5, 0.5]))
    assert np.allclose(expected_utility(LINE_GAME, p), [1.5, 1.5], atol=1e-12)


def test_expected_utility_pure_profile_is_entry():
    rng = np.random.default_rng(0)
    g = random_game(rng, (3, 4))
    for i in range(3):
        for j in range(4):
            p = MixedProfile.pure((3, 4), (i, j))
            assert np.array_equal(expected_utility(g, p), g.payoffs[:, i, j])


def test_expected_utility_uniform_2x2_is_mean():
    rng = np.random.default_rng(1)
    g = random_game(rng, (2, 2))
    u = expected_utility(g, MixedProfile.uniform((2, 2)))
    assert np.allclose(u, g.payoffs.reshape(2, -1).mean(axis=1), atol=1e-12)


def test_action_value_examples():
    y_half = MixedProfile(([1.0, 0.0], [0.5, 0.5]))
    assert action_value(LINE_GAME, 0, 0, y_half) == pytest.approx(1.5, abs=1e-12)
    x = MixedProfile(([0.25, 0.75], [1.0, 0.0]))
    assert action_value(LINE_GAME, 1, 0, x) == pytest.approx(1.5, abs=1e-12)
    pure = MixedProfile.pure((2, 2), (1, 0))
    assert action_value(LINE_GAME, 0, 0, pure) == 3.0
    assert action_value(LINE_GAME, 1, 1, pure) == 1.0


def test_action_value_index_out_of_range():
    with pytest.raises(GameError):
        action_value(LINE_GAME, 0, 2, MixedProfile.uniform((2, 2)))


def test_profile_shape_mismatch():
    with pytest.raises(GameError):
        expected_utility(LINE_GAME, MixedProfile.uniform((3, 2)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 4), min_size=2, max_size=3),
       st.floats(0, 1))
def test_multilinearity(seed, actions, lam):
    rng = np.random.default_rng(seed)
    g = random_game(rng, actions)
    base = random_profile(rng, actions)
    i = int(rng.integers(len(actions)))
    xa, xb = rng.dirichlet(np.ones(actions[i])), rng.dirichlet(np.ones(actions[i]))

    def with_i(x):
        probs = list(base.probs)
        probs[i] = x
        return MixedProfile(tuple(probs))

    mixed = expected_utility(g, with_i(lam * xa + (1 - lam) * xb))
    combo = lam * expected_utility(g, with_i(xa)) + (1 - lam) * expected_utility(g, with_i(xb))
    assert np.allclose(mixed, combo, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 4), min_size=2, max_size=3))
def test_expected_utility_matches_brute_force_and_action_values(seed, actions):
    rng = np.random.default_rng(seed)
    g = random_game(rng, actions)
    p = random_profile(rng, actions)
    u = expected_utility(g, p)
    assert np.allclose(u, brute_expected_utility(g, p.probs), atol=1e-9)
    for i in range(g.n):
        assert u[i] == pytest.approx(float(p.probs[i] @ action_values(g, i, p)), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_restrict_preserves_utility_of_supported_profile(seed):
    rng = np.random.default_rng(seed)
    actions = (4, 3)
    g = random_game(rng, actions)
    sup = SupportProfile((tuple(sorted(rng.choice(4, 2, replace=False))), (0, 2)))
    sub_probs = [rng.dirichlet(np.ones(len(s))) for s in sup.supports]
    full = []
    for m, s, x in zip(actions, sup.supports, sub_probs):
        v = np.zeros(m)
        v[list(s)] = x
        full.append(v)
    sub = restrict(g, sup)
    assert np.allclose(expected_utility(sub, MixedProfile(tuple(sub_probs))),
                       expected_utility(g, MixedProfile(tuple(full))), atol=1e-9)


# -- supports and restriction ------------------------------------------------------

def test_support_of_examples():
    p = MixedProfile(([0.5, 0.5, 0.0], [1.0, 0.0], [1e-15, 1 - 1e-15]))
    assert support_of(p).supports == ((0, 1), (0,), (1,))


def test_support_of_all_below_threshold():
    p = MixedProfile(([0.5, 0.5], [1.0]))
    with pytest.raises(DegenerateProfileError):
        support_of(p, eps=0.9)


def test_restrict_padded_top_left_is_line_game():
    sub = restrict(PADDED_LINE_GAME, SupportProfile(((0, 1), (0, 1))))
    assert np.array_equal(sub.payoffs, LINE_GAME.payoffs)


def test_restrict_full_and_single_cell():
    full = SupportProfile(((0, 1, 2, 3), (0, 1, 2, 3)))
    assert np.array_equal(restrict(PADDED_LINE_GAME, full).payoffs, PADDED_LINE_GAME.payoffs)
    one = restrict(PADDED_LINE_GAME, SupportProfile(((2,), (2,))))
    assert one.actions == (1, 1) and one.cells.tolist() == [[5, 0]]


# -- file I/O -----------------------------------------------------------------------

def test_round_trip_generated_games(tmp_path):
    for seed in range(5):
        g, _ = gen_hard(HardSpec(6, 2, seed))
        path = tmp_path / f"g{seed}.json"
        save_game(g, path)
        assert load_game(path) == g


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.lists(st.integers(1, 3), min_size=2, max_size=4))
def test_json_round_trip_property(seed, actions):
    rng = np.random.default_rng(seed)
    g = Game(rng.integers(-9, 10, size=(len(actions),) + tuple(actions)).astype(float), name="r")
    back = game_from_json(json.loads(json.dumps(game_to_json(g))))
    assert back == g


def test_flat_layout_last_index_fastest():
    doc = {"players": 3, "actions": [2, 2, 2], "payoffs": [list(range(8)), [0] * 8, [0] * 8]}
    g = game_from_json(doc)
    assert g.payoffs[0, 0, 0, 1] == 1 and g.payoffs[0, 0, 1, 0] == 2 and g.payoffs[0, 1, 0, 0] == 4


def test_load_2x2_example(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"actions": [2, 2], "players": 2, "payoffs": [[3, 0, 1, 2], [0, 3, 2, 1]]}))
    assert np.array_equal(load_game(path).payoffs, LINE_GAME.payoffs)


@pytest.mark.parametrize("doc,fragment", [
    ({"players": 2, "actions": [2, 2], "payoffs": [[1, 2, 3], [1, 2, 3, 4]]}, "payoffs[0] must have 4"),
    ({"players": 2, "actions": [2, 2], "payoffs": [[1, 2, 3, 4], [1, 2, 3, "x"]]}, "payoffs[1][3]"),
    ({"players": 2, "actions": [2], "payoffs": [[1], [1]]}, "actions"),
    ({"players": 2, "actions": [2, 2]}, "missing field 'payoffs'"),
    ({"players": 2, "actions": [1, 1], "payoffs": [[1], [1]], "extra": 1}, "unknown field"),
    ({"players": 1, "actions": [1], "payoffs": [[1]]}, "players"),
])
def test_malformed_documents(doc, fragment):
    with pytest.raises(GameFormatError, match=fragment.replace("[", r"\[").replace("]", r"\]")):
        game_from_json(doc)


def test_non_finite_entry_rejected(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"players": 2, "actions": [1, 1], "payoffs": [[NaN], [1]]}')
    with pytest.raises(GameFormatError, match="not a finite number"):
        load_game(path)


def test_parse_error_has_line_and_column(tmp_path):
    path = tmp_path / "g.json"
    path.write_text('{"players": 2,\n  "actions": [1 1]}')
    with pytest.raises(GameFormatError, match=r"g\.json:2:\d+"):
        load_game(path)


def test_profile_round_trip(tmp_path):
    p = MixedProfile(([0.25, 0.75], [0.5, 0.5]))
    save_profile(p, tmp_path / "p.json")
    assert load_profile(tmp_path / "p.json") == p


def test_game_equality_is_by_value():
    a = Game.from_bimatrix([[1, 2]], [[3, 4]])
    b = Game.from_bimatrix(np.array([[1.0, 2.0]]), np.array([[3.0, 4.0]]))
    assert a == b and hash(a) == hash(b)
    assert a != Game.from_bimatrix([[1, 2]], [[3, 5]])


def test_uniform_profile_helpers():
    assert MixedProfile.uniform((3, 2)).probs[0].tolist() == pytest.approx([1 / 3] * 3)
    assert MixedProfile.uniform((4, 2), [(1, 3), (0,)]).probs[0].tolist() == [0, 0.5, 0, 0.5]
    assert MixedProfile.pure((2, 3), (1, 2)).probs[1].tolist() == [0, 0, 1]
