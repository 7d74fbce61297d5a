"""Interpolation, filtering and minimax estimation for sequences whose
n-th order step-mu differences are stationary."""

from .errors import (
    ConfigError,
    FactorizationError,
    InsufficientFourierRangeError,
    NoConvergenceError,
    NonIntegrableDensityError,
    PositivityViolationError,
    QuadratureConvergenceError,
    ResidualFailureError,
    SingularOperatorError,
    StatincError,
    SupportLeakageError,
)
from .filtering import FilteringProblem, build_extended_weights, solve_filtering
from .increments import (
    IncrementSpec,
    IncrementWeights,
    apply_difference,
    build_d_matrix,
    d_coefficients,
    difference_weights,
    functional_decomposition,
    step_decomposition_coefficients,
)
from .interpolate import (
    EstimateSolution,
    InterpolationProblem,
    TimeWeights,
    evaluate_characteristic,
    extract_time_weights,
    orthogonality_residuals,
    reduced_characteristic,
    solve_functional,
    solve_increment_functional,
    solve_single_increment,
)
from .minimax import (
    DensityClass,
    LeastFavorableSolution,
    assemble_density,
    fejer_riesz_factorize,
    quadratic_mse_objective,
    minimax_characteristic,
    saddle_objective,
    solve_D0_fixed_point,
    solve_known_g,
    verify_saddle_D0,
    verify_saddle_DM,
    white_noise_least_favorable,
)
from .operators import (
    CoefficientSolution,
    ComposedOperators,
    OperatorSet,
    TruncationReport,
    build_operator_set,
    compose,
    solve_coefficients,
    truncation_sweep,
)
from .oracle import (
    ComparisonReport,
    MonteCarloResult,
    OracleConfig,
    OracleResult,
    compare_spectral_vs_oracle,
    increment_autocovariance,
    monte_carlo_check,
    projection_oracle,
)
from .spectral import (
    DensityModel,
    FourierTable,
    QuadratureConfig,
    check_integrability,
    require_integrable,
    fourier_coefficients,
    structure_function,
)

__version__ = "0.1.0"
