"""Low-rank quantum state reconstruction from structured entrywise measurements.

The main pipeline recovers a rank-R density matrix from noisy principal
submatrices observed along an overlapping block pattern: per-block
truncated eigendecompositions are fused into a global column-space
estimate, and the state is finished by a columnwise or eigenvalue
least-squares solve plus a physicality projection. Optimization
baselines (factorized gradient descent and a nuclear-norm surrogate) and
a seeded benchmark harness round out the package.
"""

from .baselines import (
    BMConfig,
    NuclearConfig,
    bm_objective_and_gradient,
    bm_qst,
    matched_budget,
    nuclear_qst,
)
from .bench import ExperimentConfig, TrialResult, load_config, run_sweep, run_trial
from .errors import (
    AlgQSTError,
    AmbiguousSubspaceWarning,
    BoundInapplicableError,
    DegenerateEigenvalueSystemError,
    IllConditionedColumnError,
    InsufficientBlockSizeError,
    InvalidBasisError,
    InvalidPatternParametersError,
    InvalidRankError,
    InvalidStateError,
    NonConvergedError,
    ShapeError,
    StepSizeError,
    UnderDeterminedColumnError,
)
from .kernels import available_backends, backend_name
from .measure import (
    MeasurementRecord,
    NoiseSpec,
    ObservedSubmatrix,
    pauli_expectations,
    random_pauli_set,
    sample_submatrices,
)
from .patterns import (
    IndexSet,
    PatternReport,
    SelectionPattern,
    entry_observables,
    load_pattern,
    overlapping_block_pattern,
    save_pattern,
    settings_count_enumerated,
    settings_count_formula,
    validate_pattern,
)
from .qcore import (
    DensityMatrix,
    HermitianObservable,
    fidelity,
    ginibre_random_state,
    load_density,
    pauli_observable,
    project_to_physical,
    save_density,
    trace_distance,
)
from .reconstruct import (
    EigenvalueEstimate,
    ReconstructionOptions,
    ReconstructionResult,
    algebraic_qst,
    complete_columns,
    estimate_eigenvalues,
)
from .subspace import (
    ErrorBudget,
    PaddedBasis,
    SubspaceEstimate,
    block_top_eigvecs,
    chordal_distance,
    global_subspace_dense,
    global_subspace_matfree,
    padded_basis,
    perblock_projector_bound,
    subspace_error_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AlgQSTError",
    "AmbiguousSubspaceWarning",
    "BMConfig",
    "BoundInapplicableError",
    "DegenerateEigenvalueSystemError",
    "DensityMatrix",
    "EigenvalueEstimate",
    "ErrorBudget",
    "ExperimentConfig",
    "HermitianObservable",
    "IllConditionedColumnError",
    "IndexSet",
    "InsufficientBlockSizeError",
    "InvalidBasisError",
    "InvalidPatternParametersError",
    "InvalidRankError",
    "InvalidStateError",
    "MeasurementRecord",
    "NoiseSpec",
    "NonConvergedError",
    "NuclearConfig",
    "ObservedSubmatrix",
    "PaddedBasis",
    "PatternReport",
    "ReconstructionOptions",
    "ReconstructionResult",
    "SelectionPattern",
    "ShapeError",
    "StepSizeError",
    "SubspaceEstimate",
    "TrialResult",
    "UnderDeterminedColumnError",
    "algebraic_qst",
    "available_backends",
    "backend_name",
    "block_top_eigvecs",
    "bm_objective_and_gradient",
    "bm_qst",
    "chordal_distance",
    "complete_columns",
    "entry_observables",
    "estimate_eigenvalues",
    "fidelity",
    "ginibre_random_state",
    "global_subspace_dense",
    "global_subspace_matfree",
    "load_config",
    "load_density",
    "load_pattern",
    "matched_budget",
    "nuclear_qst",
    "overlapping_block_pattern",
    "padded_basis",
    "pauli_expectations",
    "pauli_observable",
    "perblock_projector_bound",
    "project_to_physical",
    "random_pauli_set",
    "run_sweep",
    "run_trial",
    "sample_submatrices",
    "save_density",
    "save_pattern",
    "settings_count_enumerated",
    "settings_count_formula",
    "subspace_error_bound",
    "trace_distance",
    "validate_pattern",
    "__version__",
]
