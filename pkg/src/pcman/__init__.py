"""Pairwise-comparison rankings, their manipulation, and its detection."""

from .core import (
    Method,
    PCMatrix,
    PriorityVector,
    Ranking,
    ConsistencyReport,
    validate,
    derive,
    derive_evm,
    derive_gmm,
    rank_of,
    consistency,
    consistency_index,
    consistent_from_weights,
    hadamard_distance,
    random_index,
)
from .manip import (
    Algorithm,
    ManipulationRequest,
    ManipulationResult,
    compute_changes,
    row_compute_changes,
    matrix_compute_changes,
    find_m,
)
from .detect import DetectionReport, Suspect, detect_row_manipulation
from .montecarlo import (
    BucketStats,
    ExperimentConfig,
    GenerationConfig,
    fill_buckets,
    generate_disturbed,
    run_experiment,
    select_pq,
)
from .io import read_matrix, write_matrix, write_result, read_experiment_config
from . import exceptions

__version__ = "0.1.0"
