"""Geometric necessary conditions for mixed strong Nash equilibria.

For two players, the payoff points of the cells inside a mixed SNE's support
must lie on one line; for ``n`` players, on one ``(n-1)``-dimensional
hyperplane. The predicates below test those conditions with tolerances
relative to the size of the point cloud and never divide by payoff
differences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game import Game, GameError, SupportProfile, restrict

EPS_ALIGN = 1e-9


@dataclass(frozen=True)
class AlignmentReport:
    aligned: bool
    normal: np.ndarray | None = None
    offset: float | None = None
    phi: float | None = None
    ordering: tuple[int, ...] | None = None
    admissible: bool | None = None


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > 1e-15)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def parallelogram_check(r1, r2, r3, r4, eps: float = EPS_ALIGN) -> bool:
    """True when R1R2 is parallel to R3R4 and R1R3 is parallel to R2R4.

    Parallelism is a cross-product test scaled by the segment lengths, so
    zero-length segments and equal coordinates need no special casing.
    """
    r1, r2, r3, r4 = (np.asarray(r, dtype=float) for r in (r1, r2, r3, r4))
    for r in (r1, r2, r3, r4):
        if r.shape != (2,):
            raise GameError("parallelogram_check works on 2-d points")

    def parallel(a, b):
        return abs(_cross(a, b)) <= eps * np.linalg.norm(a) * np.linalg.norm(b)

    return parallel(r2 - r1, r4 - r3) and parallel(r3 - r1, r4 - r2)


def _line_fit(pts: np.ndarray):
    """Total-least-squares line: (centroid, unit direction, max residual, diameter)."""
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    diam = float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))
    if diam == 0.0:
        return centroid, None, 0.0, 0.0
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    direction = _canonical_sign(vt[0])
    normal = np.array([-direction[1], direction[0]])
    resid = float(np.max(np.abs(centered @ normal)))
    return centroid, direction, resid, diam


def collinear(points, eps: float = EPS_ALIGN) -> AlignmentReport:
    """Do the 2-d ``points`` lie on one line (within ``eps`` times their diameter)?

    When aligned, the line is reported as ``normal . u = offset`` with a
    unit normal whose first nonzero component is positive, together with
    ``phi = normal[1] / normal[0]`` (the line ``u1 + phi * u2 = c``) when the
    normal has a nonzero first component, and the point indices sorted along
    the line direction.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GameError("collinear expects an array of 2-d points")
    if len(pts) < 2:
        raise GameError("collinear needs at least two points")
    centroid, direction, resid, diam = _line_fit(pts)
    if direction is None:
        return AlignmentReport(True, ordering=tuple(range(len(pts))))
    if resid > eps * diam:
        return AlignmentReport(False)
    normal = _canonical_sign(np.array([-direction[1], direction[0]]))
    offset = float(normal @ centroid)
    phi = float(normal[1] / normal[0]) if abs(normal[0]) > 1e-15 else None
    order = tuple(int(i) for i in np.argsort(pts @ direction, kind="stable"))
    return AlignmentReport(True, normal, offset, phi, order)


def alignment_admissible(r1, r2, r3, r4, eps: float = EPS_ALIGN) -> tuple[bool, tuple[int, ...]]:
    """Check whether four collinear cell points are ordered so a mixed SNE is possible.

    ``r1..r4`` are the cells (row 1, col 1), (row 1, col 2), (row 2, col 1),
    (row 2, col 2). The admissible orders put R1 and R4 at one end and R2 and
    R3 at the other, in either internal order. The returned ordering uses
    0-based labels (0 for R1).
    """
    rep = collinear([r1, r2, r3, r4], eps)
    if not rep.aligned:
        raise GameError("alignment_admissible needs collinear points")
    order = rep.ordering
    ends = ({order[0], order[1]}, {order[2], order[3]})
    ok = ends == ({0, 3}, {1, 2}) or ends == ({1, 2}, {0, 3})
    return ok, order


def affine_rank_deficient(points, eps: float = EPS_ALIGN) -> bool:
    """True iff ``points`` (shape ``(k, n)``) fit on an ``(n-1)``-dimensional hyperplane."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k, n = pts.shape
    if k <= n:
        return True
    s = np.linalg.svd(pts - pts.mean(axis=0), compute_uv=False)
    if s[0] == 0.0:
        return True
    return bool(s[n - 1] <= eps * s[0])


def hyperplane_check(points, eps: float = EPS_ALIGN) -> bool:
    """Do the n-dimensional payoff points lie on a common hyperplane?"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] < 2:
        raise GameError("hyperplane_check needs points of dimension >= 2")
    return affine_rank_deficient(pts, eps)


def _triples_aligned(tri: np.ndarray, eps: float) -> np.ndarray:
    """Batched collinearity of point triples, shape ``(N, 3, 2)``; same test as ``collinear``."""
    centered = tri - tri.mean(axis=1, keepdims=True)
    diffs = tri[:, :, None, :] - tri[:, None, :, :]
    diam = np.sqrt((diffs**2).sum(-1)).max(axis=(1, 2))
    cov = np.einsum("nki,nkj->nij", centered, centered)
    _, vecs = np.linalg.eigh(cov)
    direction = vecs[:, :, 1]
    normal = np.stack([-direction[:, 1], direction[:, 0]], axis=1)
    resid = np.abs(np.einsum("nki,ni->nk", centered, normal)).max(axis=1)
    return resid <= eps * diam


_TRIPLES = np.array(list(itertools.combinations(range(4), 3)))


def aligned_2x2_witness_scan(game: Game, eps: float = EPS_ALIGN, count: bool = False):
    """Is there a 2x2 sub-bimatrix with at least three collinear payoff points?

    Scans every pair of rows against every pair of columns. With
    ``count=True`` returns ``(found, number_of_subbimatrices_scanned)``.
    """
    if game.n != 2:
        raise GameError(f"2x2 scan needs a 2-player game, got n={game.n}")
    m1, m2 = game.actions
    rows = list(itertools.combinations(range(m1), 2))
    cols = list(itertools.combinations(range(m2), 2))
    scanned = len(rows) * len(cols)
    if scanned == 0:
        return (False, 0) if count else False
    cells = np.moveaxis(game.payoffs, 0, -1)
    r = np.asarray(rows)
    c = np.asarray(cols)
    # quad[a, b, corner, :] for rows r[a], cols c[b]; corners in R1..R4 order
    quad = np.stack(
        [
            cells[r[:, 0][:, None], c[:, 0][None, :]],
            cells[r[:, 0][:, None], c[:, 1][None, :]],
            cells[r[:, 1][:, None], c[:, 0][None, :]],
            cells[r[:, 1][:, None], c[:, 1][None, :]],
        ],
        axis=2,
    ).reshape(-1, 4, 2)
    found = False
    step = 50_000
    for start in range(0, len(quad), step):
        tri = quad[start:start + step][:, _TRIPLES].reshape(-1, 3, 2)
        if _triples_aligned(tri, eps).any():
            found = True
            break
    return (found, scanned) if count else found


def pairwise_2_subgame_scan(game: Game, eps: float = EPS_ALIGN) -> bool:
    """n-player analogue of the 2x2 scan.

    Looks at every sub-game in which each player keeps two actions (one if
    the player only has one) and asks whether ``n + 1`` of its payoff points
    lie on a common hyperplane.
    """
    n = game.n
    choices = [list(itertools.combinations(range(m), min(2, m))) for m in game.actions]
    need = n + 1
    for pick in itertools.product(*choices):
        sub = game.payoffs[np.ix_(range(n), *[list(p) for p in pick])]
        pts = sub.reshape(n, -1).T
        if len(pts) < need:
            continue
        for subset in itertools.combinations(range(len(pts)), need):
            if affine_rank_deficient(pts[list(subset)], eps):
                return True
    return False


def detect_degeneracy(game: Game, support: SupportProfile | None = None) -> bool:
    """Does the (restricted) bimatrix break the pairwise-distinctness assumptions?

    Degenerate means some player has two equal payoffs in one row or in one
    column of the restricted bimatrix (e.g. ``p1 == p3`` or ``p1 == p2``);
    duplicate rows or columns are a special case.
    """
    if game.n != 2:
        raise GameError(f"detect_degeneracy needs a 2-player game, got n={game.n}")
    g = restrict(game, support) if support is not None else game
    for u in g.payoffs:
        for axis in (0, 1):
            s = np.sort(u, axis=axis)
            if np.any(np.diff(s, axis=axis) == 0):
                return True
    return False


def support_alignment(game: Game, support: SupportProfile, eps: float = EPS_ALIGN) -> AlignmentReport:
    """Collinearity report for the payoff points of a bimatrix restricted to ``support``."""
    sub = restrict(game, support)
    pts = sub.cells
    if len(pts) < 2:
        return AlignmentReport(True, ordering=(0,))
    return collinear(pts, eps)
