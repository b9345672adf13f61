"""Optimal AdaBoost as a deterministic dynamical system on the weight simplex.

The weak learner always returns a minimum weighted-error hypothesis, so
each boosting round is a fixed function of the current example weights.
This package runs that map exactly, inverts it geometrically, and
measures how runs converge: margins, tie gaps, support vectors, cycles,
selection frequencies, and held-out error curves.
"""

from .dataset import Dataset, DatasetError, load_csv, save_csv, split
from .diagnostics import (
    BirkhoffReport,
    CycleReport,
    MarginSnapshot,
    SelectionFrequencies,
    SupportVectorReport,
    TestErrorCurve,
    TieGapRecord,
    birkhoff_average,
    detect_cycle,
    ensemble_score,
    margin_snapshot,
    margin_snapshot_at,
    min_margin_trace,
    selection_frequencies,
    support_vectors,
    test_error_curve,
    tie_gap,
    unique_selection_trace,
)
from .dynamics import (
    BoostHalt,
    HaltReason,
    RoundRecord,
    Trajectory,
    boost_step,
    initial_weight,
    random_simplex_weight,
    run,
    select_row,
    uniform_weight,
    update_weights,
    vote_weight,
    weighted_error,
)
from .estimator import OptimalAdaBoost
from .experiment import ConfigError, ExperimentConfig, inspect_dir, run_experiment
from .geometry import (
    PreimageBoundReport,
    RegionInfo,
    SegmentPreimage,
    check_preimage_error_bound,
    d_distance,
    decompose,
    error_along,
    region_of,
    row_preimage,
    segments_to_json,
    step_preimages,
)
from .stumps import (
    ConstantStump,
    DichotomyMatrix,
    EmptyHypothesisSpaceError,
    MergeReport,
    PerfectHypothesisError,
    Stump,
    build_matrix,
    dichotomy_of,
    dump_matrix,
    enumerate_stumps,
    merge_equivalent,
    prune,
)
from .synthetic import rudin3, two_gaussians, xor_grid

__version__ = "0.1.0"

__all__ = [
    "BirkhoffReport",
    "BoostHalt",
    "ConfigError",
    "ConstantStump",
    "CycleReport",
    "Dataset",
    "DatasetError",
    "DichotomyMatrix",
    "EmptyHypothesisSpaceError",
    "ExperimentConfig",
    "HaltReason",
    "MarginSnapshot",
    "MergeReport",
    "OptimalAdaBoost",
    "PerfectHypothesisError",
    "PreimageBoundReport",
    "RegionInfo",
    "RoundRecord",
    "SegmentPreimage",
    "SelectionFrequencies",
    "Stump",
    "SupportVectorReport",
    "TestErrorCurve",
    "TieGapRecord",
    "Trajectory",
    "birkhoff_average",
    "boost_step",
    "build_matrix",
    "check_preimage_error_bound",
    "d_distance",
    "decompose",
    "detect_cycle",
    "dichotomy_of",
    "dump_matrix",
    "ensemble_score",
    "enumerate_stumps",
    "error_along",
    "initial_weight",
    "inspect_dir",
    "load_csv",
    "margin_snapshot",
    "margin_snapshot_at",
    "merge_equivalent",
    "min_margin_trace",
    "prune",
    "random_simplex_weight",
    "region_of",
    "row_preimage",
    "rudin3",
    "run",
    "run_experiment",
    "save_csv",
    "segments_to_json",
    "select_row",
    "selection_frequencies",
    "split",
    "step_preimages",
    "support_vectors",
    "test_error_curve",
    "tie_gap",
    "two_gaussians",
    "uniform_weight",
    "unique_selection_trace",
    "update_weights",
    "vote_weight",
    "weighted_error",
    "xor_grid",
]
