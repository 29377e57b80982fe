"""Estimator-style wrappers: configure, ``fit(problem)``, then ``predict(z)``."""
import numpy as np
from sklearn.base import BaseEstimator

from . import fixedpoint, olver
from .core import ProblemSpec, validate_problem
from .exceptions import KindMismatch


def _check_problem(problem):
    if not isinstance(problem, ProblemSpec):
        raise TypeError("fit expects a ProblemSpec")
    return validate_problem(problem)


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise AttributeError(f"{type(est).__name__} is not fitted yet; call fit first")


class FixedPointExpansion(BaseEstimator):
    """Convergent fixed-point expansion of a ProblemSpec.

    ``predict(z)`` returns the iterate of order ``order`` (the converged
    iterate when ``order`` is None) at points of the solve domain.
    """

    def __init__(self, tol=1e-12, max_order=200, n_nodes=None, order=None):
        self.tol = tol
        self.max_order = max_order
        self.n_nodes = n_nodes
        self.order = order

    def fit(self, problem, y=None):
        problem = _check_problem(problem)
        self.problem_ = problem
        self.result_ = fixedpoint.solve(problem, self.tol, self.max_order, self.n_nodes)
        self.order_used_ = self.result_.order_used
        self.converged_ = self.result_.converged
        self.increments_ = np.array(self.result_.increments)
        self.apriori_bound_ = self.result_.apriori_bound
        return self

    def predict(self, z):
        _check_fitted(self, "result_")
        k = self.order_used_ if self.order is None else min(self.order, self.order_used_)
        return self.result_.iterates[k](z)

    def remainder_bound(self, n=None):
        _check_fitted(self, "result_")
        n = self.order_used_ if n is None else n
        return fixedpoint.remainder_bound(self.problem_, self.result_, n)


class OlverExpansion(BaseEstimator):
    """Order-n Poincare-type approximant normalized to the problem's data.

    ``g`` must be a ComplexPolynomial for the polynomial backend; the grid
    backend samples ``problem.g`` on the segment.
    """

    def __init__(self, order=3, g=None, backend=olver.POLYNOMIAL, n_nodes=65):
        self.order = order
        self.g = g
        self.backend = backend
        self.n_nodes = n_nodes

    def fit(self, problem, y=None):
        problem = _check_problem(problem)
        if not problem.kind.is_linear:
            raise KindMismatch("the Olver expansion needs a linear problem")
        g = self.g if self.g is not None else problem.g
        self.coefficients_ = olver.coefficients(
            g, self.order + 1, self.backend, problem.segment, self.n_nodes
        )
        self.problem_ = problem
        self.approximant_ = olver.normalize_to_problem(
            self.coefficients_, problem.lam, problem, self.order
        )
        return self

    def predict(self, z):
        _check_fitted(self, "approximant_")
        return self.approximant_(z)

    def remainder_bound(self, branch="plus"):
        _check_fitted(self, "approximant_")
        g = self.g if self.g is not None else self.problem_.g
        return olver.olver_remainder_bound(
            self.coefficients_, g, self.problem_.lam, self.order, branch, self.problem_.segment
        )
