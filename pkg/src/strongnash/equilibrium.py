"""Nash equilibrium verification and fixed-support solving for bimatrix games."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game import (
    EPS_SUPPORT,
    Game,
    GameError,
    MixedProfile,
    SupportProfile,
    action_values,
    check_profile,
)

EPS_NE = 1e-9
PIVOT_RTOL = 1e-12


@dataclass(frozen=True)
class NeCertificate:
    values: np.ndarray
    max_violation: float
    binding: tuple[tuple[int, ...], ...]
    action_values: tuple[np.ndarray, ...]


def verify_ne(game: Game, profile: MixedProfile, eps: float = EPS_NE) -> tuple[bool, NeCertificate]:
    """Check the Nash conditions and report residuals.

    A profile passes when no action beats the expected utility by more than
    ``eps``, every support action attains it within ``eps``, and each mixture
    is a probability vector.
    """
    check_profile(game, profile)
    values = np.empty(game.n)
    avs = []
    binding = []
    worst = 0.0
    for i, x in enumerate(profile.probs):
        av = action_values(game, i, profile)
        v = float(x @ av)
        values[i] = v
        avs.append(av)
        worst = max(worst, float(np.max(av - v)))
        on = x > EPS_SUPPORT
        if on.any():
            worst = max(worst, float(np.max(np.abs(av[on] - v))))
        worst = max(worst, float(-x.min()), abs(float(x.sum()) - 1.0))
        binding.append(tuple(int(a) for a in np.flatnonzero(np.abs(av - v) <= eps)))
    cert = NeCertificate(values, max(worst, 0.0), tuple(binding), tuple(avs))
    return cert.max_violation <= eps, cert


def enumerate_pure_ne(game: Game, eps: float = EPS_NE) -> list[tuple[int, ...]]:
    """All pure Nash equilibria in row-major lexicographic order."""
    mask = np.ones(game.actions, dtype=bool)
    for i in range(game.n):
        u = game.payoffs[i]
        mask &= u >= u.max(axis=i, keepdims=True) - eps
    return [tuple(int(a) for a in idx) for idx in np.argwhere(mask)]


def _lu_solve_batch(k: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian elimination with partial pivoting on a stack of square systems.

    Returns ``(solutions, singular)``; a system is singular when some pivot is
    below ``PIVOT_RTOL`` times its matrix's largest absolute entry.
    """
    k = np.array(k, dtype=float)
    b = np.array(rhs, dtype=float)
    nb, s, _ = k.shape
    rows = np.arange(nb)
    scale = np.abs(k).max(axis=(1, 2))
    scale[scale == 0] = 1.0
    singular = np.zeros(nb, dtype=bool)
    for col in range(s):
        piv = col + np.argmax(np.abs(k[:, col:, col]), axis=1)
        top, other = k[rows, col].copy(), k[rows, piv].copy()
        k[rows, col], k[rows, piv] = other, top
        bt, bo = b[rows, col].copy(), b[rows, piv].copy()
        b[rows, col], b[rows, piv] = bo, bt
        p = k[:, col, col]
        bad = np.abs(p) < PIVOT_RTOL * scale
        singular |= bad
        p = np.where(bad, 1.0, p)
        f = k[:, col + 1:, col] / p[:, None]
        k[:, col + 1:, :] -= f[:, :, None] * k[:, col, None, :]
        b[:, col + 1:] -= f * b[:, col, None]
    z = np.zeros_like(b)
    for r in reversed(range(s)):
        acc = b[:, r] - np.einsum("ij,ij->i", k[:, r, r + 1:], z[:, r + 1:])
        d = np.where(singular, 1.0, k[:, r, r])
        z[:, r] = acc / d
    return z, singular


def indifference_batch(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mixtures over the columns of each ``m[b]`` that equalize all of its rows.

    Solves ``m[b] @ z = v * 1``, ``sum(z) = 1`` for every matrix in the stack
    ``m`` of shape ``(N, r, c)``. Square nonsingular systems go through LU
    with partial pivoting; singular or rectangular ones fall back to the
    minimum-norm least-squares solution, accepted only when it satisfies the
    system. Returns ``(z, v, ok)``; ``z`` may still contain negative entries.
    """
    m = np.asarray(m, dtype=float)
    nb, r, c = m.shape
    k = np.zeros((nb, r + 1, c + 1))
    k[:, :r, :c] = m
    k[:, :r, c] = -1.0
    k[:, r, :c] = 1.0
    rhs = np.zeros((nb, r + 1))
    rhs[:, r] = 1.0
    if r == c:
        sol, fallback = _lu_solve_batch(k, rhs)
    else:
        sol = np.zeros((nb, c + 1))
        fallback = np.ones(nb, dtype=bool)
    if fallback.any():
        kf = k[fallback]
        sol[fallback] = np.einsum("bij,bj->bi", np.linalg.pinv(kf, rcond=PIVOT_RTOL), rhs[fallback])
    resid = np.abs(np.einsum("bij,bj->bi", k, sol) - rhs).max(axis=1)
    scale = np.maximum(1.0, np.abs(m).reshape(nb, -1).max(axis=1, initial=0.0))
    ok = np.isfinite(sol).all(axis=1) & (resid <= 1e-9 * scale)
    return sol[:, :c], sol[:, c], ok


def _embed(m: int, support, z: np.ndarray) -> np.ndarray:
    x = np.zeros(m)
    x[list(support)] = np.clip(z, 0.0, None)
    return x / x.sum()


def solve_support_2p(game: Game, support: SupportProfile, eps: float = EPS_NE) -> MixedProfile | None:
    """Nash equilibrium of a bimatrix game with actions restricted to ``support``.

    Each player's mixture is chosen to make the opponent indifferent across
    the opponent's support actions. The result is returned only if it is a
    Nash equilibrium of the full game.
    """
    if game.n != 2:
        raise GameError(f"solve_support_2p needs a 2-player game, got n={game.n}")
    support.check(game)
    s1, s2 = support.supports
    a, b = game.payoffs
    xz, _, xok = indifference_batch(b[np.ix_(s1, s2)].T[None])
    yz, _, yok = indifference_batch(a[np.ix_(s1, s2)][None])
    if not (xok[0] and yok[0]):
        return None
    if xz.min() < -eps or yz.min() < -eps:
        return None
    profile = MixedProfile((_embed(game.actions[0], s1, xz[0]), _embed(game.actions[1], s2, yz[0])))
    ok, _ = verify_ne(game, profile, eps)
    return profile if ok else None


def positive_vertices(opp: np.ndarray, tied, eps: float = EPS_NE) -> tuple[list[np.ndarray], bool]:
    """Strictly positive vertices of one side's equilibrium polytope on a support.

    ``opp`` has one row per opponent action and one column per own support
    action (the opponent's payoffs). The polytope holds the mixtures ``z``
    that tie the rows in ``tied`` at a common value ``v`` with every other
    row at most ``v``. A vertex with all ``z > 0`` is pinned down by ``tied``
    plus some set of further rows that also reach ``v``, so those row sets
    are enumerated by size. Returns ``(vertices, determined)`` where
    ``determined`` says whether ``tied`` alone fixes ``z``.
    """
    opp = np.asarray(opp, dtype=float)
    r, k = opp.shape
    tied = list(tied)
    others = [i for i in range(r) if i not in set(tied)]
    scale = max(1.0, float(np.abs(opp).max(initial=0.0)))
    found: list[np.ndarray] = []
    minimal: list[set] = []
    for size in range(0, min(len(others), k) + 1):
        for extra in itertools.combinations(others, size):
            if any(s.issubset(extra) for s in minimal):
                continue
            rows = tied + list(extra)
            sys = np.zeros((len(rows) + 1, k + 1))
            sys[:-1, :k] = opp[rows]
            sys[:-1, k] = -1.0
            sys[-1, :k] = 1.0
            rhs = np.zeros(len(rows) + 1)
            rhs[-1] = 1.0
            sol, _, rank, _ = np.linalg.lstsq(sys, rhs, rcond=PIVOT_RTOL)
            if rank < k + 1:
                if size == 0 and np.abs(sys @ sol - rhs).max() > 1e-9 * scale:
                    return [], False
                continue
            minimal.append(set(extra))
            if np.abs(sys @ sol - rhs).max() > 1e-9 * scale:
                continue
            z, v = sol[:k], sol[k]
            if z.min() <= EPS_SUPPORT or (opp @ z).max() > v + eps:
                continue
            z = z / z.sum()
            if not any(np.allclose(z, f, atol=1e-12) for f in found):
                found.append(z)
    return found, bool(minimal and not minimal[0])
