"""Random payoff perturbations and the smoothed-runtime experiment harness."""

from __future__ import annotations

import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .characterization import aligned_2x2_witness_scan
from .game import Game, GameError
from .hard import HardSpec, gen_hard
from .rng import SplitMix64, mix_seed
from .solver import Aborted, sne_find

log = logging.getLogger(__name__)

DEFAULT_STEP_BUDGET = 10_000_000


class Model(str, enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class PerturbationSpec:
    model: Model
    sigma: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise GameError(f"sigma must be a positive finite number, got {self.sigma}")
        if self.sigma >= 1:
            log.warning("sigma=%g lies outside (0, 1)", self.sigma)


def perturb(game: Game, spec: PerturbationSpec) -> Game:
    """Add an independent draw to every payoff entry of every player.

    Draws are taken in the flat order of ``game.payoffs`` (player-major,
    then row-major cells): uniform on ``[-sigma, sigma]`` or normal with
    standard deviation ``sigma``.
    """
    rng = SplitMix64(spec.seed)
    size = game.payoffs.size
    if spec.model is Model.UNIFORM:
        noise = [spec.sigma * (2.0 * rng.uniform() - 1.0) for _ in range(size)]
    else:
        noise = [spec.sigma * rng.normal() for _ in range(size)]
    noisy = game.payoffs + np.asarray(noise).reshape(game.payoffs.shape)
    return Game(noisy, name=game.name)


@dataclass
class TrialRecord:
    trial: int
    phase: int | None
    status: str
    supports_enumerated: int
    wall_time: float
    aligned: bool


@dataclass
class ExperimentReport:
    trials: int
    phase_histogram: dict = field(default_factory=dict)
    status_counts: dict = field(default_factory=dict)
    mean_time: float = 0.0
    max_time: float = 0.0
    alignment_hit_rate: float = 0.0
    smoothed_time_estimate: float = 0.0
    records: list[TrialRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "phase_histogram": {str(k): v for k, v in sorted(self.phase_histogram.items(), key=lambda kv: str(kv[0]))},
            "status_counts": dict(sorted(self.status_counts.items())),
            "mean_time": self.mean_time,
            "max_time": self.max_time,
            "alignment_hit_rate": self.alignment_hit_rate,
            "smoothed_time_estimate": self.smoothed_time_estimate,
        }


def run_experiment(base, spec_template: PerturbationSpec, trials: int,
                   budget: int = DEFAULT_STEP_BUDGET, grid_k: int = 20) -> ExperimentReport:
    """Perturb ``base`` ``trials`` times and solve each copy.

    ``base`` is a :class:`Game` or a :class:`HardSpec`. Trial ``t`` uses seed
    ``mix_seed(spec_template.seed, t)``. Budget overruns land in the
    ``"aborted"`` histogram bucket.
    """
    if trials < 1:
        raise GameError("trials must be >= 1")
    game = gen_hard(base)[0] if isinstance(base, HardSpec) else base
    records = []
    for t in range(trials):
        spec = replace(spec_template, seed=mix_seed(spec_template.seed, t))
        g = perturb(game, spec)
        aligned = bool(aligned_2x2_witness_scan(g))
        try:
            res = sne_find(g, budget=budget, grid_k=grid_k)
            rec = TrialRecord(t, res.phase, res.status.value, res.stats.supports_enumerated,
                              res.stats.wall_time, aligned)
        except Aborted as exc:
            rec = TrialRecord(t, None, "Aborted", exc.stats.supports_enumerated,
                              exc.stats.wall_time, aligned)
        records.append(rec)
    return summarize(records)


def summarize(records: list[TrialRecord]) -> ExperimentReport:
    times = [r.wall_time for r in records]
    hist = Counter("aborted" if r.phase is None else r.phase for r in records)
    return ExperimentReport(
        trials=len(records),
        phase_histogram=dict(hist),
        status_counts=dict(Counter(r.status for r in records)),
        mean_time=float(np.mean(times)),
        max_time=float(np.max(times)),
        alignment_hit_rate=sum(r.aligned for r in records) / len(records),
        smoothed_time_estimate=float(np.mean(times)),
        records=records,
    )


def fit_polynomial_exponent(sizes, times) -> tuple[float, float]:
    """Least-squares fit of ``log(time) = k * log(m) + log(c)``; returns ``(k, c)``."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(times, dtype=float))
    k, logc = np.polyfit(x, y, 1)
    return float(k), float(math.exp(logc))


CSV_FIELDS = ("trial", "phase", "supports_enumerated", "wall_time", "status")


def records_to_csv_rows(records: list[TrialRecord]) -> list[dict]:
    return [
        {
            "trial": r.trial,
            "phase": "" if r.phase is None else r.phase,
            "supports_enumerated": r.supports_enumerated,
            "wall_time": f"{r.wall_time:.6f}",
            "status": r.status,
        }
        for r in records
    ]

