"""Radial solutions of quasilinear problems with oscillating nonlinearities.

The package computes primitives and asymptotic limits of an oscillating
nonlinearity, existence/nonexistence thresholds on balls, radial shooting
diagrams for the p-Laplacian and for Pucci extremal operators, and a
direct variational minimizer for the truncated energy.
"""

from .errors import (
    DomainError,
    EmptyGrid,
    InfeasibleDelta,
    NoZerosFound,
    NonConvergence,
    NonintegrableStep,
    NonpositiveFbar,
    NotAZeroHit,
    OscillapError,
    QuadratureFailure,
    StalledAtCriticalPoint,
)
from .nonlinearity import (
    CustomTable,
    EnvelopeTimesOnePlusSin,
    Nonlinearity,
    PowerTimesOnePlusSin,
    PureSine,
    ReciprocalOscillation,
    ZeroSequence,
    find_zeros,
    nonlinearity_from_json,
)
from .primitives import (
    LimitEstimate,
    PrimitiveCalculus,
    classify_ratio_samples,
)
from .thresholds import (
    BallGeometry,
    Operator,
    ThresholdReport,
    compute_thresholds,
    estimate_M,
    lambda_bar_estimate,
    lambda_n_sequence,
    lambda_under_plap,
    lambda_under_pucci,
    per_solution_lower_bound,
    propose_gammas,
    pucci_per_solution_lower_bound,
    reduce_negative_f0,
)

from .shoot_plap import (
    BifurcationDiagram,
    Bounced,
    Diagnostics,
    DiagramRow,
    HitZero,
    HorizonExceeded,
    ShootConfig,
    ShootResult,
    Stalled,
    check_necessary_conditions,
    clustered_heights,
    diagram,
    diagram_csv_lines,
    rescale_to_ball,
    shoot,
    write_diagram_csv,
)
from .shoot_pucci import (
    PucciDiagramRow,
    PucciShootConfig,
    pucci_csv_lines,
    pucci_inequality_check,
    pucci_rescale,
    pucci_scan,
    pucci_shoot,
)
from .variational import (
    GridFunction,
    MinimizeResult,
    Potential,
    SequenceItem,
    TruncatedNonlinearity,
    assemble_energy,
    comparison_function,
    energy_gradient,
    minimize,
    negativity_test,
    radial_grid,
    run_sequence,
    sequence_csv_lines,
)

__version__ = "0.1.0"

__all__ = [
    "BallGeometry",
    "BifurcationDiagram",
    "Bounced",
    "CustomTable",
    "Diagnostics",
    "DiagramRow",
    "DomainError",
    "EmptyGrid",
    "EnvelopeTimesOnePlusSin",
    "GridFunction",
    "HitZero",
    "HorizonExceeded",
    "InfeasibleDelta",
    "LimitEstimate",
    "MinimizeResult",
    "NoZerosFound",
    "NonConvergence",
    "NonintegrableStep",
    "Nonlinearity",
    "NonpositiveFbar",
    "NotAZeroHit",
    "Operator",
    "OscillapError",
    "Potential",
    "PowerTimesOnePlusSin",
    "PrimitiveCalculus",
    "PucciDiagramRow",
    "PucciShootConfig",
    "PureSine",
    "QuadratureFailure",
    "ReciprocalOscillation",
    "SequenceItem",
    "ShootConfig",
    "ShootResult",
    "Stalled",
    "StalledAtCriticalPoint",
    "ThresholdReport",
    "TruncatedNonlinearity",
    "ZeroSequence",
    "assemble_energy",
    "check_necessary_conditions",
    "classify_ratio_samples",
    "clustered_heights",
    "comparison_function",
    "compute_thresholds",
    "diagram",
    "diagram_csv_lines",
    "energy_gradient",
    "estimate_M",
    "find_zeros",
    "lambda_bar_estimate",
    "lambda_n_sequence",
    "lambda_under_plap",
    "lambda_under_pucci",
    "minimize",
    "negativity_test",
    "nonlinearity_from_json",
    "per_solution_lower_bound",
    "propose_gammas",
    "pucci_csv_lines",
    "pucci_inequality_check",
    "pucci_per_solution_lower_bound",
    "pucci_rescale",
    "pucci_scan",
    "pucci_shoot",
    "radial_grid",
    "reduce_negative_f0",
    "rescale_to_ball",
    "run_sequence",
    "sequence_csv_lines",
    "shoot",
    "write_diagram_csv",
    "__version__",
]
