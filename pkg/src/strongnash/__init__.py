"""Strong Nash equilibrium tools for finite strategic-form games."""

__version__ = "0.1.0"
FORMAT_VERSION = 1

from .characterization import (  # noqa: E402
    AlignmentReport,
    aligned_2x2_witness_scan,
    alignment_admissible,
    collinear,
    detect_degeneracy,
    hyperplane_check,
    parallelogram_check,
    support_alignment,
)
from .equilibrium import enumerate_pure_ne, positive_vertices, solve_support_2p, verify_ne  # noqa: E402
from .game import (  # noqa: E402
    Game,
    GameError,
    GameFormatError,
    MixedProfile,
    SupportProfile,
    action_value,
    expected_utility,
    load_game,
    load_profile,
    restrict,
    save_game,
    save_profile,
    support_of,
)
from .hard import HardSpec, gen_block_even, gen_block_odd, gen_hard  # noqa: E402
from .pareto import (  # noqa: E402
    Frontier,
    FrontierVerdict,
    SneStatus,
    coalition_outcome_points,
    correlated_frontier_check,
    mixed_deviation_falsifier,
    pair_deviation_check,
    verify_sne,
)
from .smoothed import ExperimentReport, Model, PerturbationSpec, perturb, run_experiment  # noqa: E402
from .solver import Aborted, SolveResult, SolveStats, SolveStatus, enumerate_sne, sne_find, sne_find_pure_n  # noqa: E402
