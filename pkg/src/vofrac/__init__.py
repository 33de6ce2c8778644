"""Variable-order Riemann-Liouville fractional derivatives and integrals."""
from .errors import (
    BandCrossingError,
    DomainError,
    ExponentError,
    FormatError,
    NonUniformGrid,
    ParseError,
    PoleError,
    PoleGuardError,
    ResolutionError,
    SingularCalibration,
    VofracError,
    ZeroPivot,
)
from .expr import Expr, parse_expression
from .fields import DimensionField, FunctionSpec, GridFunction, ScalarField, order_index
from .io import emit_grid_csv, ingest_csv
from .near_integer import (
    ApproxComparison,
    EpsilonField,
    approx_above_one,
    approx_below_one,
    approx_log_form,
    calibrate_alpha,
    compare_approx,
    covariant_form,
    fit_alpha,
)
from .operators import (
    EvalResult,
    OperatorSpec,
    evaluate_many,
    gfd_left,
    gfd_right,
    gfd_spatial,
    gfd_symmetric,
    rl_left,
    rl_right,
)
from .quadrature import QuadratureConfig, kernel_moment, outer_derivative, singular_convolve
from .solver import ModelProblem, SolveReport, apply_forward, march_linear, solve_fixed_point
from .special import digamma, gamma

__version__ = "0.1.0"
