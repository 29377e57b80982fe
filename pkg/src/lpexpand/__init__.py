"""Large-parameter expansions for z y'' + 2 lam y' = g(z) y and its nonlinear variant."""
from .core import (
    Arc,
    ExpansionResult,
    GridFunction,
    LargeParameter,
    Line,
    Path,
    ProblemKind,
    ProblemSpec,
    RaySegment,
    lambda_from_tilde,
    validate_problem,
)
from .estimators import FixedPointExpansion, OlverExpansion
from .exceptions import *  # noqa: F401,F403
from .fixedpoint import contraction_factor, phi_minus, phi_plus, remainder_bound, solve
from .olver import (
    CoefficientSequence,
    ComplexPolynomial,
    coefficients,
    next_coefficient,
    normalize_to_problem,
    olver_remainder_bound,
    partial_sum_minus,
    partial_sum_plus,
)
from .quadrature import (
    KernelIntegralPlan,
    apply_minus_kernel,
    apply_plus_kernel,
    differentiate,
    kernel_bound_check,
    l1_norm,
    sup_norm,
)

__version__ = "0.1.0"
