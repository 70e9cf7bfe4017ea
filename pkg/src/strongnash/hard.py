"""Worst-case bimatrix games for support enumeration.

Each instance has its strong Nash equilibria on one known support, all with
utility (1/2, 1/2). For ``mbar >= 3`` that support carries a polytope of
them; the uniform profile is the designated representative.

Block layout for support size ``mbar`` (``m = 2 * mbar`` actions each); the
first ``mbar`` actions of each player form ``A^1``, the rest ``A^2``:

==========  ==========================  ==========================
block       player 1                    player 2
==========  ==========================  ==========================
A^1 x A^1   1 where i + j even, else 0  1 where i + j odd, else 0
A^1 x A^2   -mbar                       -mbar on the diagonal, else 1
A^2 x A^1   -mbar on the diagonal,      -mbar
            else 1
A^2 x A^2   0                           0
==========  ==========================  ==========================

Indices are 0-based within each block, so cell (0, 0) pays (1, 0). For odd
``mbar`` the A^1 x A^1 block keeps the checkerboard only in its leading
``(mbar-1) x (mbar-1)`` corner; its last row and column are 1/2 for both
players.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .game import Game, GameError, MixedProfile
from .rng import SplitMix64


@dataclass(frozen=True)
class HardSpec:
    m: int
    mbar: int
    seed: int = 0

    def __post_init__(self):
        if self.mbar < 1:
            raise GameError(f"mbar must be >= 1, got {self.mbar}")
        if self.m < 1:
            raise GameError(f"m must be >= 1, got {self.m}")
        if self.mbar >= 2 and 2 * self.mbar > self.m:
            raise GameError(f"need 2*mbar <= m, got m={self.m}, mbar={self.mbar}")


def _checkerboard(k: int) -> tuple[np.ndarray, np.ndarray]:
    i, j = np.indices((k, k))
    even = (i + j) % 2 == 0
    return even.astype(float), (~even).astype(float)


def _blocks(mbar: int, top1: np.ndarray, top2: np.ndarray) -> Game:
    off = np.where(np.eye(mbar, dtype=bool), -float(mbar), 1.0)
    const = np.full((mbar, mbar), -float(mbar))
    zero = np.zeros((mbar, mbar))
    u1 = np.block([[top1, const], [off, zero]])
    u2 = np.block([[top2, off], [const, zero]])
    return Game.from_bimatrix(u1, u2)


def gen_block_even(mbar: int) -> Game:
    """Block game whose SNE all sit on one support of size ``mbar`` (even ``mbar``)."""
    if mbar < 2 or mbar % 2:
        raise GameError(f"gen_block_even needs an even mbar >= 2, got {mbar}")
    top1, top2 = _checkerboard(mbar)
    g = _blocks(mbar, top1, top2)
    return Game(g.payoffs, name=f"block-even-{mbar}")


def gen_block_odd(mbar: int) -> Game:
    """Odd-``mbar`` variant: the top-left block is padded with 1/2 entries."""
    if mbar < 3 or mbar % 2 == 0:
        raise GameError(f"gen_block_odd needs an odd mbar >= 3, got {mbar}")
    top1 = np.full((mbar, mbar), 0.5)
    top2 = np.full((mbar, mbar), 0.5)
    c1, c2 = _checkerboard(mbar - 1)
    top1[: mbar - 1, : mbar - 1] = c1
    top2[: mbar - 1, : mbar - 1] = c2
    g = _blocks(mbar, top1, top2)
    return Game(g.payoffs, name=f"block-odd-{mbar}")


def gen_block(mbar: int) -> Game:
    return gen_block_even(mbar) if mbar % 2 == 0 else gen_block_odd(mbar)


def gen_hard(spec: HardSpec) -> tuple[Game, MixedProfile]:
    """Hard-to-solve instance and its known SNE.

    Padding cells are filled row-major, player 1's payoff drawn before
    player 2's, each uniform on ``{-mbar, ..., 0}`` from
    ``SplitMix64(spec.seed)``. Block cells consume no draws. For
    ``mbar == 1`` the cell (0, 0) is fixed to (1, 1).
    """
    m, mbar = spec.m, spec.mbar
    rng = SplitMix64(spec.seed)
    u = np.zeros((2, m, m))
    if mbar == 1:
        fixed = np.zeros((m, m), dtype=bool)
        fixed[0, 0] = True
        u[:, 0, 0] = 1.0
        known = MixedProfile.pure((m, m), (0, 0))
    else:
        block = gen_block(mbar)
        size = 2 * mbar
        u[:, :size, :size] = block.payoffs
        fixed = np.zeros((m, m), dtype=bool)
        fixed[:size, :size] = True
        known = MixedProfile.uniform((m, m), [range(mbar), range(mbar)])
    for r in range(m):
        for c in range(m):
            if not fixed[r, c]:
                u[0, r, c] = rng.integers(-mbar, 0)
                u[1, r, c] = rng.integers(-mbar, 0)
    name = f"hard-m{m}-mbar{mbar}-seed{spec.seed}"
    return Game(u, name=name), known
