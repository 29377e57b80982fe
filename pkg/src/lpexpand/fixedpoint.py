"""Convergent fixed-point expansion for z y'' + 2 lam y' = rhs.

Plus problems iterate ``y_{n+1} = y0 + (z/a) int_0^1 (1 - s**a) F_n(z s) ds``
and Minus problems ``y_{n+1} = phi_-(z) + (1/a) int_{z0}^{z} (1 - (t/z)**a)
F_n(t) dt``, with ``F_n = g y_n (+ forcing)`` or ``F_n = f(t, y_n)``.

For linear problems the differences ``d_n = y_{n+1} - y_n`` are carried
alongside the iterates through ``d_{n+1} = K[g d_n]``. They stay accurate to
full relative precision long after they have sunk below the rounding level
of ``y_n`` itself, which is what lets the tails ``y - y_n`` be measured.
"""
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import (
    DEFAULT_NODES,
    ExpansionResult,
    GridFunction,
    ProblemSpec,
    validate_problem,
)
from .exceptions import KindMismatch, NoConvergence, NotConverged
from .quadrature import KernelIntegralPlan, kernel_bound_check

MAX_NODES = 1025
RESOLVE_TOL = 1e-13
# grid used to measure sup |g| for the contraction factor
_NORM_NODES = 257


@dataclass(frozen=True, eq=False)
class IterationState:
    problem: ProblemSpec
    plan: KernelIntegralPlan
    phi: GridFunction
    current: GridFunction
    previous: Optional[GridFunction]
    n: int
    increment_norms: Tuple[float, ...]
    differences: Tuple[GridFunction, ...] = ()
    g: Optional[GridFunction] = None


def phi_plus(problem: ProblemSpec, n_nodes=DEFAULT_NODES) -> GridFunction:
    """Solution of the homogeneous Plus problem: the constant y0."""
    if not problem.kind.is_plus:
        raise KindMismatch("phi_plus needs a Plus problem")
    return GridFunction.constant(problem.segment, problem.y0, n_nodes)


def phi_minus(problem: ProblemSpec, n_nodes=DEFAULT_NODES) -> GridFunction:
    """``ybar0 + y1 z0/(1 - 2 lam) [(z/z0)**(1 - 2 lam) - 1]`` on the Minus path."""
    if problem.kind.is_plus:
        raise KindMismatch("phi_minus needs a Minus problem")
    validate_problem(problem)
    a = problem.lam.two_lambda_minus_one
    z0 = problem.anchor
    path = problem.domain()
    L = np.log(path.points(n_nodes))
    bracket = np.expm1(-a * (L - np.log(z0)))
    vals = problem.ybar0 + problem.y1 * z0 / (-a) * bracket
    return GridFunction(path, vals)


def _phi(problem, n_nodes):
    return phi_plus(problem, n_nodes) if problem.kind.is_plus else phi_minus(problem, n_nodes)


def _rhs(problem, y: GridFunction) -> GridFunction:
    return y.with_values(problem.rhs(y.points, y.values))


def start(problem: ProblemSpec, n_nodes=DEFAULT_NODES) -> IterationState:
    """Order-0 state ``y_0 = phi``."""
    validate_problem(problem)
    plan = KernelIntegralPlan.for_problem(problem, n_nodes)
    phi = _phi(problem, n_nodes)
    g = None
    if problem.kind.is_linear:
        g = GridFunction.sample(plan.path, problem.g, n_nodes)
    return IterationState(problem, plan, phi, phi, None, 0, (), (), g)


def iterate(state: IterationState) -> IterationState:
    """One step of the fixed-point map."""
    p = state.problem
    w = state.plan.apply(_rhs(p, state.current))
    nxt = state.phi + w
    if state.n == 0:
        d = w - (state.current - state.phi)
    elif p.kind.is_linear:
        d = state.plan.apply(state.g * state.differences[-1])
    else:
        d = nxt - state.current
    return IterationState(
        p,
        state.plan,
        state.phi,
        nxt,
        state.current,
        state.n + 1,
        state.increment_norms + (d.sup_norm(),),
        state.differences + (d,),
        state.g,
    )


def _run(problem, n_nodes, tol, max_order, min_order):
    state = start(problem, n_nodes)
    iterates = [state.current]
    converged = False
    while state.n < max_order:
        state = iterate(state)
        iterates.append(state.current)
        inc = state.increment_norms[-1]
        if state.n >= min_order and inc < tol * (1.0 + state.current.sup_norm()):
            converged = True
            break
    return state, iterates, converged


def _resolution(state: IterationState) -> float:
    """Largest Chebyshev tail among the quantities the kernel integrates."""
    F = _rhs(state.problem, state.current)
    tails = [state.current.tail(), F.tail()]
    if not state.problem.kind.is_plus:
        a = state.problem.lam.two_lambda_minus_one
        L = np.log(F.points)
        E = np.exp(a * (L - np.log(state.problem.anchor)))
        tails.append(F.with_values(E * F.values).tail())
    if state.differences:
        tails.append(state.differences[0].tail())
    return max(tails)


def solve(
    problem: ProblemSpec,
    tol: float = 1e-12,
    max_order: int = 200,
    n_nodes: Optional[int] = None,
    min_order: int = 0,
) -> ExpansionResult:
    """Iterate to ``||y_{n+1} - y_n|| < tol (1 + ||y_{n+1}||)``.

    Without ``n_nodes`` the grid starts at 65 nodes per piece and is refined
    (``N -> 2N - 1``) until the Chebyshev tails of the iterate and of the
    integrands drop below 1e-13.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    validate_problem(problem)
    n = n_nodes or DEFAULT_NODES
    while True:
        state, iterates, converged = _run(problem, n, tol, max_order, min_order)
        if n_nodes is not None or n >= MAX_NODES or _resolution(state) < RESOLVE_TOL:
            break
        n = 2 * n - 1
    incs = state.increment_norms
    if not converged and len(incs) > 1 and incs[-1] >= incs[0]:
        raise NoConvergence(
            f"increments did not decrease over {len(incs)} iterations "
            f"({incs[0]:.3e} -> {incs[-1]:.3e})"
        )
    order = state.n
    factor = contraction_factor(problem, order) if order >= 1 else 1.0
    bound = factor * (state.current - state.phi).sup_norm()
    return ExpansionResult(
        iterates=tuple(iterates),
        increments=tuple(incs),
        apriori_bound=float(bound),
        converged=converged,
        order_used=order,
        differences=state.differences,
        problem=problem,
    )


def sup_g(problem: ProblemSpec, n_nodes=_NORM_NODES) -> float:
    """``||g||_inf`` over the solve domain, measured on a fine grid."""
    if not problem.kind.is_linear:
        return float(problem.lipschitz)
    g = GridFunction.sample(problem.domain(), problem.g, n_nodes)
    return g.sup_norm()


def contraction_factor(problem: ProblemSpec, n: int, C: Optional[float] = None) -> float:
    """``(2 |z_max - z0| C)**n / (n! |2 lam - 1|**n)``.

    C is ``||g||_inf`` for linear problems and the Lipschitz constant L for
    nonlinear ones; ``|z_max - z0|`` is the length of the solve domain.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    if C is None:
        C = sup_g(problem)
    if C == 0.0:
        return 0.0
    x = 2.0 * problem.domain().length * C / abs(problem.lam.two_lambda_minus_one)
    return math.exp(n * math.log(x) - math.lgamma(n + 1))


def remainder_bound(problem: ProblemSpec, result: ExpansionResult, n: int,
                    rescaled: bool = False) -> float:
    """A-priori bound ``contraction_factor(n) * ||y_final - phi||_inf``.

    For Minus problems the estimate is only provable for the rescaled
    unknown: with ``rescaled=True`` the norm is taken of
    ``(z/z0)**a (y_final - phi)`` and the bound applies to
    ``|(z/z0)**a R_n(z)|``.
    """
    if not result.converged:
        raise NotConverged("remainder_bound needs a converged expansion")
    y = result.final
    phi = _phi(problem, y.n)
    diff = y - phi
    if rescaled and not problem.kind.is_plus:
        diff = diff.with_values(rescale_weights(problem, y.n) * diff.values)
    return contraction_factor(problem, n) * diff.sup_norm()


def rescale_weights(problem: ProblemSpec, n_nodes: int):
    """``(z/z0)**a`` at the nodes of the Minus path."""
    a = problem.lam.two_lambda_minus_one
    L = np.log(problem.domain().points(n_nodes))
    return np.exp(a * (L - np.log(problem.anchor)))


def volterra_residual(problem: ProblemSpec, y: GridFunction, n_nodes: Optional[int] = None) -> float:
    """``max |y - phi - K[F(y)]| / max |y|`` on a finer grid (default ``2N - 1``)."""
    m = n_nodes or 2 * y.n - 1
    yf = y.resample(m)
    plan = KernelIntegralPlan.for_problem(problem, m)
    res = yf - _phi(problem, m) - plan.apply(_rhs(problem, yf))
    return res.sup_norm() / max(yf.sup_norm(), np.finfo(float).tiny)


def kernel_bound(problem: ProblemSpec, n_nodes=DEFAULT_NODES) -> float:
    return kernel_bound_check(KernelIntegralPlan.for_problem(problem, n_nodes))
