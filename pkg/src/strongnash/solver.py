"""Three-phase SNE search for bimatrix games, and pure-SNE search for n players.

Phase 1 checks pure profiles. Phase 2 looks for a 2x2 sub-bimatrix with
three collinear payoff points; in a game without tied payoffs no mixed SNE
can exist without one, and the search stops. Phase 3 enumerates support
pairs by total size, then by ``(|S1|, |S2|)``, then lexicographically
(``S1`` outer, ``S2`` inner) and solves the indifference systems on each.

Games with tied payoffs can have whole segments of equilibria on one
support, which a single solution per support may miss. For them the
phase-2 shortcut is skipped, and if the main pass finds nothing a second
pass visits the supports again and tries every strictly positive vertex of
their equilibrium polytopes. An SNE on a support can always be moved to
such a vertex (each player's utility depends only on the other's mixture),
so this pass is complete.
"""

from __future__ import annotations

import enum
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .characterization import (
    aligned_2x2_witness_scan,
    detect_degeneracy,
    hyperplane_check,
    pairwise_2_subgame_scan,
)
from .equilibrium import EPS_NE, enumerate_pure_ne, indifference_batch, positive_vertices, verify_ne
from .game import EPS_SUPPORT, Game, GameError, MixedProfile, support_of
from .pareto import DEFAULT_GRID_K, SneStatus, verify_sne


class SolveStatus(str, enum.Enum):
    FOUND = "Found"
    NON_EXISTENCE = "NonExistence"
    INDETERMINATE = "Indeterminate"


@dataclass
class SolveStats:
    pure_profiles_checked: int = 0
    subbimatrices_scanned: int = 0
    supports_enumerated: int = 0
    ne_candidates: int = 0
    vertex_supports: int = 0
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "pure_profiles_checked": self.pure_profiles_checked,
            "subbimatrices_scanned": self.subbimatrices_scanned,
            "supports_enumerated": self.supports_enumerated,
            "ne_candidates": self.ne_candidates,
            "vertex_supports": self.vertex_supports,
            "wall_time": self.wall_time,
        }


@dataclass
class SolveResult:
    status: SolveStatus
    profile: MixedProfile | None
    phase: int
    stats: SolveStats
    indeterminate: list[MixedProfile] = field(default_factory=list)
    all_sne: list[MixedProfile] = field(default_factory=list)
    mixed_ruled_out: bool | None = None

    def to_json(self) -> dict:
        doc = {
            "status": self.status.value,
            "phase": self.phase,
            "profile": None if self.profile is None else self.profile.to_json()["probs"],
            "indeterminate": [p.to_json()["probs"] for p in self.indeterminate],
            "stats": self.stats.to_json(),
        }
        if self.all_sne:
            doc["all_sne"] = [p.to_json()["probs"] for p in self.all_sne]
        if self.mixed_ruled_out is not None:
            doc["mixed_ruled_out"] = self.mixed_ruled_out
        return doc


class Aborted(RuntimeError):
    """Phase 3 hit the support budget before finishing."""

    def __init__(self, message: str, stats: SolveStats):
        super().__init__(message)
        self.stats = stats


def support_batches(m1: int, m2: int, min_total: int = 3):
    """Yield ``(S1, [S2, ...])`` groups in enumeration order."""
    for total in range(min_total, m1 + m2 + 1):
        for k1 in range(max(1, total - m2), min(m1, total - 1) + 1):
            k2 = total - k1
            s2_all = list(itertools.combinations(range(m2), k2))
            for s1 in itertools.combinations(range(m1), k1):
                yield s1, s2_all


def _pure_phase(game, eps, grid_k, stop_at_first):
    """Returns (sne list, indeterminate list, profiles checked)."""
    found, undecided = [], []
    total = int(np.prod(game.actions))
    for prof in enumerate_pure_ne(game, eps):
        pos = int(np.ravel_multi_index(prof, game.actions))
        p = MixedProfile.pure(game.actions, prof)
        status, _ = verify_sne(game, p, eps, grid_k)
        if status is SneStatus.SNE:
            found.append(p)
            if stop_at_first:
                return found, undecided, pos + 1
        elif status is SneStatus.INDETERMINATE:
            undecided.append(p)
    return found, undecided, total


def _evaluate_batch(game, s1, s2_list, eps, grid_k, stop_at_first):
    """Candidates of one support group: list of (offset, status, profile)."""
    a, b = game.payoffs
    m1, m2 = game.actions
    s1 = list(s1)
    s2 = np.asarray(s2_list)
    x, _, xok = indifference_batch(np.transpose(b[s1][:, s2], (1, 2, 0)))
    live = xok & (x > EPS_SUPPORT).all(axis=1)
    out = []
    if not live.any():
        return out
    idx = np.flatnonzero(live)
    y, _, yok = indifference_batch(np.transpose(a[s1][:, s2[idx]], (1, 0, 2)))
    good = yok & (y > EPS_SUPPORT).all(axis=1)
    for j in np.flatnonzero(good):
        off = int(idx[j])
        px = np.zeros(m1)
        px[s1] = x[off] / x[off].sum()
        py = np.zeros(m2)
        py[s2[off]] = y[j] / y[j].sum()
        profile = MixedProfile((px, py))
        ok, _ = verify_ne(game, profile, eps)
        if not ok:
            continue
        status, _ = verify_sne(game, profile, eps, grid_k)
        out.append((off, status, profile))
        if stop_at_first and status is SneStatus.SNE:
            break
    return out


def _vertex_pass(game, eps, grid_k, find_all, budget, stats, found, undecided):
    """Second pass for games with ties: every positive polytope vertex per support.

    At most one SNE is kept per support profile.
    """
    a, b = game.payoffs
    m1, m2 = game.actions
    seen = list(found) + list(undecided)
    covered = {support_of(p).supports for p in found}
    for s1, s2_list in support_batches(m1, m2):
        for s2 in s2_list:
            if (tuple(s1), tuple(s2)) in covered:
                continue
            if budget is not None and stats.supports_enumerated + stats.vertex_supports >= budget:
                raise Aborted(f"support budget {budget} exhausted", stats)
            stats.vertex_supports += 1
            xs, x_fixed = positive_vertices(b[list(s1)].T, s2, eps)
            if not xs:
                continue
            ys, y_fixed = positive_vertices(a[:, list(s2)], s1, eps)
            if not ys or (x_fixed and y_fixed):
                continue
            for xz in xs:
                for yz in ys:
                    px = np.zeros(m1)
                    px[list(s1)] = xz
                    py = np.zeros(m2)
                    py[list(s2)] = yz
                    profile = MixedProfile((px, py))
                    if any(profile.allclose(p) for p in seen):
                        continue
                    ok, _ = verify_ne(game, profile, eps)
                    if not ok:
                        continue
                    seen.append(profile)
                    stats.ne_candidates += 1
                    status, _ = verify_sne(game, profile, eps, grid_k)
                    if status is SneStatus.SNE:
                        found.append(profile)
                        covered.add((tuple(s1), tuple(s2)))
                        if not find_all:
                            return
                        break
                    if status is SneStatus.INDETERMINATE:
                        undecided.append(profile)
                if (tuple(s1), tuple(s2)) in covered:
                    break


def sne_find(
    game: Game,
    *,
    eps: float = EPS_NE,
    grid_k: int = DEFAULT_GRID_K,
    budget: int | None = None,
    threads: int = 1,
    find_all: bool = False,
    use_alignment_shortcut: bool = True,
) -> SolveResult:
    """Search a bimatrix game for a strong Nash equilibrium.

    ``find_all`` keeps enumerating after the first SNE. With
    ``use_alignment_shortcut=False`` phase 3 runs even when the 2x2 scan
    finds no witness (exhaustive mode). ``budget`` caps the number of phase-3
    support pairs, both passes together; exceeding it raises :class:`Aborted`.
    """
    if game.n != 2:
        raise GameError(f"sne_find handles 2-player games; use sne_find_pure_n for n={game.n}")
    t0 = time.perf_counter()
    stats = SolveStats()
    found, undecided, checked = _pure_phase(game, eps, grid_k, stop_at_first=not find_all)
    stats.pure_profiles_checked = checked
    if found and not find_all:
        stats.wall_time = time.perf_counter() - t0
        return SolveResult(SolveStatus.FOUND, found[0], 1, stats, undecided)

    aligned, scanned = aligned_2x2_witness_scan(game, count=True)
    stats.subbimatrices_scanned = scanned
    ties = detect_degeneracy(game)
    if not aligned and use_alignment_shortcut and not ties:
        stats.wall_time = time.perf_counter() - t0
        if found:
            return SolveResult(SolveStatus.FOUND, found[0], 1, stats, undecided, all_sne=found)
        status = SolveStatus.INDETERMINATE if undecided else SolveStatus.NON_EXISTENCE
        return SolveResult(status, None, 2, stats, undecided)

    m1, m2 = game.actions
    batches = support_batches(m1, m2)
    stop_first = not find_all
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    window = max(1, 4 * threads)
    try:
        while True:
            chunk = list(itertools.islice(batches, window))
            if not chunk:
                break
            if budget is not None:
                remaining = budget - stats.supports_enumerated
                trimmed = []
                for s1, s2_list in chunk:
                    if remaining <= 0:
                        break
                    trimmed.append((s1, s2_list[:remaining]))
                    remaining -= len(trimmed[-1][1])
                over = sum(len(s) for _, s in trimmed) < sum(len(s) for _, s in chunk)
                chunk = trimmed
            else:
                over = False

            def run(item):
                return _evaluate_batch(game, item[0], item[1], eps, grid_k, stop_first)

            results = pool.map(run, chunk) if pool else map(run, chunk)
            for (s1, s2_list), cands in zip(chunk, results):
                hit = None
                for off, status, profile in cands:
                    stats.ne_candidates += 1
                    if status is SneStatus.SNE:
                        found.append(profile)
                        if stop_first:
                            hit = off
                            break
                    elif status is SneStatus.INDETERMINATE:
                        undecided.append(profile)
                if hit is not None:
                    stats.supports_enumerated += hit + 1
                    stats.wall_time = time.perf_counter() - t0
                    return SolveResult(SolveStatus.FOUND, found[0], 3, stats, undecided)
                stats.supports_enumerated += len(s2_list)
            if over:
                stats.wall_time = time.perf_counter() - t0
                raise Aborted(f"support budget {budget} exhausted", stats)
    finally:
        if pool:
            pool.shutdown()

    if ties and (find_all or not found):
        _vertex_pass(game, eps, grid_k, find_all, budget, stats, found, undecided)
        if found and not find_all:
            stats.wall_time = time.perf_counter() - t0
            return SolveResult(SolveStatus.FOUND, found[0], 3, stats, undecided)

    stats.wall_time = time.perf_counter() - t0
    if found:
        return SolveResult(SolveStatus.FOUND, found[0], 3 if stats.supports_enumerated + stats.vertex_supports else 1,
                           stats, undecided, all_sne=found)
    status = SolveStatus.INDETERMINATE if undecided else SolveStatus.NON_EXISTENCE
    return SolveResult(status, None, 3, stats, undecided)


def enumerate_sne(game: Game, *, eps: float = EPS_NE, grid_k: int = DEFAULT_GRID_K, threads: int = 1) -> SolveResult:
    """Exhaustive search: every pure profile and every support pair, no shortcut."""
    return sne_find(game, eps=eps, grid_k=grid_k, threads=threads, find_all=True,
                    use_alignment_shortcut=False)


def mixed_sne_possible(game: Game) -> bool:
    """Whether the alignment necessary condition leaves room for a mixed SNE."""
    if game.n == 2:
        return bool(aligned_2x2_witness_scan(game))
    return hyperplane_check(game.cells) or pairwise_2_subgame_scan(game)


def sne_find_pure_n(game: Game, *, eps: float = EPS_NE, grid_k: int = DEFAULT_GRID_K) -> SolveResult:
    """Pure-SNE search for any number of players, plus the mixed-existence pre-check.

    ``Found`` carries the first pure SNE. Otherwise the status is
    ``NonExistence`` when the hyperplane condition rules out mixed SNEs and
    ``Indeterminate`` when it does not.
    """
    t0 = time.perf_counter()
    stats = SolveStats()
    found, undecided, checked = _pure_phase(game, eps, grid_k, stop_at_first=True)
    stats.pure_profiles_checked = checked
    possible = mixed_sne_possible(game)
    stats.wall_time = time.perf_counter() - t0
    if found:
        return SolveResult(SolveStatus.FOUND, found[0], 1, stats, undecided, mixed_ruled_out=not possible)
    if possible or undecided:
        return SolveResult(SolveStatus.INDETERMINATE, None, 2, stats, undecided, mixed_ruled_out=not possible)
    return SolveResult(SolveStatus.NON_EXISTENCE, None, 2, stats, undecided, mixed_ruled_out=True)
