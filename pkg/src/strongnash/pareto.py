"""Coalition deviations and Pareto-frontier checks in utility space.

Weak Pareto efficiency over *mixed* coalition strategies is decided exactly
only for two-member coalitions. The tools:

* ``correlated_frontier_check`` solves a small LP over the convex hull of
  the coalition's pure outcomes. Mixed outcomes lie inside that hull, so an
  ``EFFICIENT`` verdict is conclusive.
* ``pair_deviation_check`` maximizes the smaller of two bilinear gains
  exactly, which settles every two-member coalition.
* ``mixed_deviation_falsifier`` searches coalition mixtures on a rational
  grid. A ``DOMINATED`` verdict comes with an explicit witness; finding
  nothing proves nothing, hence ``INDETERMINATE``.

``verify_sne`` chains them and reports ``INDETERMINATE`` only when a
coalition of three or more has a dominating correlated point but no mixed
witness turns up.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from .equilibrium import EPS_NE, NeCertificate, verify_ne
from .game import Game, GameError, MixedProfile, contract, expected_utility

DEFAULT_GRID_K = 20
DEFAULT_GRID_BUDGET = 2_000_000
_CHUNK_POINTS = 250_000


class Frontier(str, enum.Enum):
    EFFICIENT = "efficient"
    DOMINATED = "dominated"
    INDETERMINATE = "indeterminate"


class SneStatus(str, enum.Enum):
    SNE = "SNE"
    NOT_SNE = "NotSNE"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class FrontierVerdict:
    status: Frontier
    witness: object = None
    margin: float = 0.0


def coalitions(n: int, min_size: int = 1) -> list[tuple[int, ...]]:
    """Player subsets by size ascending, then lexicographically."""
    return [c for k in range(min_size, n + 1) for c in itertools.combinations(range(n), k)]


def _normalize_coalition(game: Game, coalition: Iterable[int]) -> tuple[int, ...]:
    c = tuple(sorted(set(int(i) for i in coalition)))
    if not c:
        raise GameError("coalition must be nonempty")
    if c[0] < 0 or c[-1] >= game.n:
        raise GameError(f"coalition {c} has players outside 0..{game.n - 1}")
    return c


def _coalition_tensor(game: Game, profile: MixedProfile, coalition: tuple[int, ...]) -> np.ndarray:
    """Members' payoffs over the coalition's joint actions, outsiders averaged out.

    Shape ``(|C|, m_c1, ..., m_ck)``.
    """
    sub = game.payoffs[list(coalition)]
    return contract(sub, profile.probs, keep=coalition)


def coalition_outcome_points(game: Game, profile: MixedProfile, coalition: Iterable[int]) -> np.ndarray:
    """One point per joint pure action of the coalition (row-major order).

    Each point holds the members' expected utilities with non-members playing
    their mixtures from ``profile``. Returns an array of shape ``(K, |C|)``.
    """
    c = _normalize_coalition(game, coalition)
    t = _coalition_tensor(game, profile, c)
    return t.reshape(len(c), -1).T


def correlated_frontier_check(points, u, eps: float = EPS_NE) -> FrontierVerdict:
    """Can some convex combination of ``points`` beat ``u`` in every coordinate?

    Solves ``max t`` subject to ``sum_k lam_k points_k >= u + t`` with ``lam``
    in the simplex. The reported margin is recomputed from the returned
    weights, so a ``DOMINATED`` witness is always genuine.
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    u = np.asarray(u, dtype=float).ravel()
    if p.shape[0] == 0:
        raise GameError("need at least one point")
    if p.shape[1] != u.size:
        raise GameError(f"points have dimension {p.shape[1]}, target has {u.size}")
    k, d = p.shape
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-p.T, np.ones((d, 1))])
    b_ub = -u
    a_eq = np.zeros((1, k + 1))
    a_eq[0, :k] = 1.0
    bounds = [(0, None)] * k + [(None, None)]
    res = linprog(
        c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise RuntimeError(f"frontier LP failed: {res.message}")
    lam = np.clip(res.x[:k], 0.0, None)
    lam /= lam.sum()
    witness = lam @ p
    margin = float(np.min(witness - u))
    if margin > eps:
        return FrontierVerdict(Frontier.DOMINATED, witness, margin)
    return FrontierVerdict(Frontier.EFFICIENT, None, max(margin, float(-res.fun)))


@lru_cache(maxsize=256)
def simplex_grid(m: int, size: int, k: int) -> np.ndarray:
    """Mixtures over ``m`` actions with exactly ``size`` positive multiples of ``1/k``."""
    if size > min(m, k):
        return np.zeros((0, m))
    parts = []
    for cuts in itertools.combinations(range(1, k), size - 1):
        b = (0,) + cuts + (k,)
        parts.append([b[i + 1] - b[i] for i in range(size)])
    parts = np.asarray(parts, dtype=float) / k
    rows = []
    for sup in itertools.combinations(range(m), size):
        block = np.zeros((len(parts), m))
        block[:, list(sup)] = parts
        rows.append(block)
    grid = np.vstack(rows)
    grid.setflags(write=False)
    return grid


def _size_classes(limits: Sequence[int]):
    """Support-size vectors ordered by total size, then lexicographically."""
    c = len(limits)
    for total in range(c, sum(limits) + 1):
        for sizes in itertools.product(*[range(1, lim + 1) for lim in limits]):
            if sum(sizes) == total:
                yield sizes


def _outcomes(t: np.ndarray, grids: Sequence[np.ndarray]) -> np.ndarray:
    """Members' utilities for every combination of grid mixtures: ``(|C|, k_1, ..., k_c)``."""
    out = np.moveaxis(np.tensordot(grids[0], t, axes=([1], [1])), 0, 1)
    for g in grids[1:]:
        out = np.tensordot(out, g, axes=([2], [1]))
    return out


def mixed_deviation_falsifier(
    game: Game,
    profile: MixedProfile,
    coalition: Iterable[int],
    grid_k: int = DEFAULT_GRID_K,
    eps: float = EPS_NE,
    budget: int = DEFAULT_GRID_BUDGET,
) -> FrontierVerdict:
    """Search the members' mixtures on the ``1/grid_k`` simplex grid for a strict improvement.

    Grid points are visited by support size (small supports first) so cheap
    witnesses are found early; the search stops once ``budget`` grid
    combinations have been evaluated.
    """
    if grid_k < 1:
        raise GameError("grid_k must be >= 1")
    c = _normalize_coalition(game, coalition)
    t = _coalition_tensor(game, profile, c)
    u = expected_utility(game, profile)[list(c)]
    ms = [game.actions[i] for i in c]
    best = -np.inf
    evaluated = 0
    for sizes in _size_classes([min(m, grid_k) for m in ms]):
        grids = [simplex_grid(m, s, grid_k) for m, s in zip(ms, sizes)]
        rest = int(np.prod([len(g) for g in grids[1:]], dtype=np.int64))
        total = len(grids[0]) * rest
        if evaluated + total > budget:
            break
        chunk = max(1, _CHUNK_POINTS // max(rest, 1))
        for start in range(0, len(grids[0]), chunk):
            head = grids[0][start:start + chunk]
            out = _outcomes(t, [head] + grids[1:])
            gain = np.min(out - u.reshape((-1,) + (1,) * (out.ndim - 1)), axis=0)
            flat = int(np.argmax(gain))
            g = float(gain.flat[flat])
            best = max(best, g)
            if g > eps:
                idx = np.unravel_index(flat, gain.shape)
                mix = [head[idx[0]]] + [grids[j][idx[j]] for j in range(1, len(c))]
                probs = list(profile.probs)
                for player, x in zip(c, mix):
                    probs[player] = x
                return FrontierVerdict(Frontier.DOMINATED, MixedProfile(tuple(probs)), g)
        evaluated += total
    return FrontierVerdict(Frontier.INDETERMINATE, None, float(max(best, 0.0)))


def _quadratic_roots(a2, a1, a0):
    """Real roots of ``a2 t^2 + a1 t + a0`` row-wise, NaN where absent; shape ``(N, 2)``."""
    scale = np.maximum(np.maximum(np.abs(a2), np.abs(a1)), np.abs(a0))
    scale = np.where(scale == 0, 1.0, scale)
    a2, a1, a0 = a2 / scale, a1 / scale, a0 / scale
    out = np.full(a2.shape + (2,), np.nan)
    lin = np.abs(a2) <= 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        out[lin, 0] = np.where(np.abs(a1[lin]) > 1e-12, -a0[lin] / a1[lin], np.nan)
        disc = a1**2 - 4 * a2 * a0
        quad = ~lin & (disc >= -1e-12)
        root = np.sqrt(np.clip(disc[quad], 0, None))
        out[quad, 0] = (-a1[quad] + root) / (2 * a2[quad])
        out[quad, 1] = (-a1[quad] - root) / (2 * a2[quad])
    return out


def _bilinear(c, p, q):
    return c[0][:, None] + c[1][:, None] * p + c[2][:, None] * q + c[3][:, None] * p * q


def _best_on_squares(fa, ga):
    """Exact ``max min(f, g)`` over ``[0,1]^2`` for stacks of bilinear pairs.

    ``fa`` and ``ga`` hold the corner values ``(v00, v01, v10, v11)`` of a
    2x2 sub-problem; ``p`` weights the first row and ``q`` the first column.
    The optimum sits at a corner, where ``f = g`` crosses an edge, or where
    ``f = g`` meets the line on which the two gradients are parallel.
    Returns ``(value, p, q)`` arrays.
    """

    def coeffs(v):
        v00, v01, v10, v11 = v
        return (v11, v01 - v11, v10 - v11, v00 - v01 - v10 + v11)

    f, g = coeffs(fa), coeffs(ga)
    e = tuple(fi - gi for fi, gi in zip(f, g))
    n = fa[0].shape[0]
    ps, qs = [], []
    for p0 in (0.0, 1.0):
        for q0 in (0.0, 1.0):
            ps.append(np.full(n, p0))
            qs.append(np.full(n, q0))
    with np.errstate(divide="ignore", invalid="ignore"):
        for fixed in (0.0, 1.0):
            # p fixed: e(q) = (e0 + e1 p) + (e2 + e3 p) q
            ps.append(np.full(n, fixed))
            qs.append(-(e[0] + e[1] * fixed) / (e[2] + e[3] * fixed))
            # q fixed: e(p) = (e0 + e2 q) + (e1 + e3 q) p
            qs.append(np.full(n, fixed))
            ps.append(-(e[0] + e[2] * fixed) / (e[1] + e[3] * fixed))
        # gradients parallel: c0 + c1 p + c2 q = 0
        c0 = f[1] * g[2] - f[2] * g[1]
        c1 = f[1] * g[3] - f[3] * g[1]
        c2 = f[3] * g[2] - f[2] * g[3]
        use_q = np.abs(c2) >= np.abs(c1)
        # q = -(c0 + c1 p) / c2 substituted into e = 0
        pr = _quadratic_roots(-e[3] * c1, c2 * e[1] - e[2] * c1 - e[3] * c0, c2 * e[0] - e[2] * c0)
        # p = -(c0 + c2 q) / c1 substituted into e = 0
        qr = _quadratic_roots(-e[3] * c2, c1 * e[2] - e[1] * c2 - e[3] * c0, c1 * e[0] - e[1] * c0)
        for k in range(2):
            p_a = pr[:, k]
            q_a = -(c0 + c1 * p_a) / c2
            q_b = qr[:, k]
            p_b = -(c0 + c2 * q_b) / c1
            ps.append(np.where(use_q, p_a, p_b))
            qs.append(np.where(use_q, q_a, q_b))
    p = np.clip(np.stack(ps, axis=1), 0.0, 1.0)
    q = np.clip(np.stack(qs, axis=1), 0.0, 1.0)
    bad = ~(np.isfinite(p) & np.isfinite(q))
    p[bad] = 0.0
    q[bad] = 0.0
    val = np.minimum(_bilinear(f, p, q), _bilinear(g, p, q))
    best = np.argmax(val, axis=1)
    rows = np.arange(n)
    return val[rows, best], p[rows, best], q[rows, best]


def pair_deviation_check(
    game: Game,
    profile: MixedProfile,
    coalition: Iterable[int],
    eps: float = EPS_NE,
) -> FrontierVerdict:
    """Exact mixed-strategy efficiency test for a two-member coalition.

    For a fixed mixture of one member, the best mixture of the other needs
    at most two actions (the optimum of ``min`` of two linear functions over
    a simplex lies on an edge of a planar hull). Alternating this argument
    shows some optimal joint deviation uses two actions per member, so it
    suffices to solve every 2x2 sub-problem exactly.
    """
    c = _normalize_coalition(game, coalition)
    if len(c) != 2:
        raise GameError(f"pair_deviation_check needs a two-member coalition, got {c}")
    t = _coalition_tensor(game, profile, c)
    u = expected_utility(game, profile)[list(c)]
    a, b = t[0] - u[0], t[1] - u[1]
    m1, m2 = a.shape
    rows = np.asarray(list(itertools.combinations_with_replacement(range(m1), 2)))
    cols = np.asarray(list(itertools.combinations_with_replacement(range(m2), 2)))
    best = (-np.inf, None)
    step = max(1, 200_000 // len(cols))
    for start in range(0, len(rows), step):
        r = rows[start:start + step]
        ri = np.repeat(r, len(cols), axis=0)
        ci = np.tile(cols, (len(r), 1))

        def corners(mat):
            return (mat[ri[:, 0], ci[:, 0]], mat[ri[:, 0], ci[:, 1]],
                    mat[ri[:, 1], ci[:, 0]], mat[ri[:, 1], ci[:, 1]])

        val, p, q = _best_on_squares(corners(a), corners(b))
        k = int(np.argmax(val))
        if val[k] > best[0]:
            best = (float(val[k]), (ri[k], ci[k], float(p[k]), float(q[k])))
    margin, (ri, ci, p, q) = best
    if margin <= eps:
        return FrontierVerdict(Frontier.EFFICIENT, None, margin)
    x = np.zeros(m1)
    x[ri[0]] += p
    x[ri[1]] += 1.0 - p
    y = np.zeros(m2)
    y[ci[0]] += q
    y[ci[1]] += 1.0 - q
    probs = list(profile.probs)
    probs[c[0]], probs[c[1]] = x, y
    witness = MixedProfile(tuple(probs))
    gain = float((expected_utility(game, witness)[list(c)] - u).min())
    if gain <= eps:
        return FrontierVerdict(Frontier.EFFICIENT, None, gain)
    return FrontierVerdict(Frontier.DOMINATED, witness, gain)


@dataclass
class SneEvidence:
    ne_ok: bool
    certificate: NeCertificate
    correlated: dict = field(default_factory=dict)
    falsifier: dict = field(default_factory=dict)

    @property
    def undecided(self) -> list[tuple[int, ...]]:
        return [c for c, v in self.falsifier.items() if v.status is Frontier.INDETERMINATE]


def verify_sne(
    game: Game,
    profile: MixedProfile,
    eps: float = EPS_NE,
    grid_k: int = DEFAULT_GRID_K,
    budget: int = DEFAULT_GRID_BUDGET,
) -> tuple[SneStatus, SneEvidence]:
    """Three-valued strong Nash check.

    Singleton coalitions are covered by the Nash test. Every larger coalition
    must pass the correlated-hull check. When it fails, two-member coalitions
    are settled exactly by :func:`pair_deviation_check`; larger ones go to
    the grid falsifier, which either exhibits a joint deviation
    (``NOT_SNE``) or leaves the verdict ``INDETERMINATE``.
    """
    ok, cert = verify_ne(game, profile, eps)
    evidence = SneEvidence(ok, cert)
    if not ok:
        return SneStatus.NOT_SNE, evidence
    u = cert.values
    for c in coalitions(game.n, min_size=2):
        pts = coalition_outcome_points(game, profile, c)
        corr = correlated_frontier_check(pts, u[list(c)], eps)
        evidence.correlated[c] = corr
        if corr.status is Frontier.EFFICIENT:
            continue
        if len(c) == 2:
            fals = pair_deviation_check(game, profile, c, eps)
        else:
            fals = mixed_deviation_falsifier(game, profile, c, grid_k, eps, budget)
        evidence.falsifier[c] = fals
        if fals.status is Frontier.DOMINATED:
            return SneStatus.NOT_SNE, evidence
    if evidence.undecided:
        return SneStatus.INDETERMINATE, evidence
    return SneStatus.SNE, evidence
