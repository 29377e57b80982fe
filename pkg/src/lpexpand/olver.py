"""Poincare-type expansion in inverse powers of the large parameter.

The coefficients obey ``A_0 = 1``,
``A_{n+1} = A_n - z A_n' + int_0^z g A_n``, and the two formal solutions are::

    y_n^+(z) = sum_{k<n} A_k(z) / (2 lam)**k
    y_n^-(z) = z**(1 - 2 lam) * sum_{k<n} A_k(z) / (2 (1 - lam))**k

Each partial sum solves the equation up to a residual::

    z y'' + 2 lam y' - g y = -A_n' / (2 lam)**(n-1)          (plus)
    z y'' + 2 lam y' - g y = -z**(1-2 lam) A_n' / (2(1-lam))**(n-1)   (minus)

which is what :func:`olver_error` feeds to the fixed-point solver to get the
error of a normalized approximant without cancellation.
"""
import cmath
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Optional, Sequence, Tuple

import numpy as np

from . import chebyshev as cheb
from .core import (
    GridFunction,
    LargeParameter,
    ProblemSpec,
    RaySegment,
    as_lambda,
    validate_problem,
)
from .exceptions import BackendMismatch, OriginError, SingularMatch

POLYNOMIAL = "Polynomial"
GRID = "Grid"

_NORM_NODES = 257
_CHOP_TOL = 1e-13


def _exact(c):
    # ints become Fractions so integer data stays exact through the recurrence
    if isinstance(c, bool):
        return Fraction(int(c))
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float) and c.is_integer():
        return Fraction(int(c))
    if isinstance(c, complex) and c.imag == 0 and c.real.is_integer():
        return Fraction(int(c.real))
    return c


class ComplexPolynomial:
    """Polynomial with coefficients in ascending powers.

    Coefficients may be Fractions (exact) or complex floats; mixing them
    follows Python's numeric tower. Evaluation accepts scalars, numpy arrays
    and mpmath numbers.
    """

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence = (0,)):
        cs = [_exact(c) for c in coefficients] or [Fraction(0)]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coefficients", tuple(cs))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexPolynomial is immutable")

    @classmethod
    def constant(cls, c):
        return cls([c])

    @classmethod
    def monomial(cls, k, c=1):
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return -1 if self.is_zero else len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coefficients) == 1 and self.coefficients[0] == 0

    def __call__(self, z):
        if isinstance(z, (np.ndarray, int, float, complex, np.number)):
            z = np.asarray(z, dtype=complex) if isinstance(z, np.ndarray) else complex(z)
            acc = 0j * z
            for c in reversed(self.coefficients):
                acc = acc * z + complex(c)
            return acc
        # other scalar types (mpmath): keep their precision
        acc = z * 0
        for c in reversed(self.coefficients):
            if isinstance(c, Fraction):
                acc = acc * z + (z * 0 + c.numerator) / c.denominator
            else:
                acc = acc * z + c
        return acc

    def derivative(self) -> "ComplexPolynomial":
        return ComplexPolynomial([k * c for k, c in enumerate(self.coefficients)][1:] or [0])

    def antiderivative(self) -> "ComplexPolynomial":
        """Antiderivative vanishing at 0."""
        return ComplexPolynomial([0] + [c / (k + 1) for k, c in enumerate(self.coefficients)])

    def times_z(self) -> "ComplexPolynomial":
        return ComplexPolynomial([0] + list(self.coefficients))

    def _coerce(self, other):
        if isinstance(other, ComplexPolynomial):
            return other
        if isinstance(other, Number):
            return ComplexPolynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return ComplexPolynomial(
            [(a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0) for k in range(n)]
        )

    __radd__ = __add__

    def __neg__(self):
        return ComplexPolynomial([-c for c in self.coefficients])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coefficients, other.coefficients
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                out[i + j] += x * y
        return ComplexPolynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return False
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"ComplexPolynomial({list(self.coefficients)!r})"


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    """``A_0, ..., A_{order-1}`` on one backend."""

    backend: str
    items: Tuple
    g: object = None

    @property
    def order(self) -> int:
        return len(self.items)

    def __getitem__(self, k):
        return self.items[k]

    def __len__(self):
        return len(self.items)

    def extended(self, order: int) -> "CoefficientSequence":
        """Sequence with at least ``order`` coefficients."""
        items = list(self.items)
        while len(items) < order:
            items.append(next_coefficient(items[-1], self.g))
        return CoefficientSequence(self.backend, tuple(items), self.g)

    def value(self, k, z):
        A = self.items[k]
        return A(z)

    def derivative_value(self, k, z):
        A = self.items[k]
        if isinstance(A, ComplexPolynomial):
            return A.derivative()(z)
        return A.derivative()(z)


def _as_grid_g(g, A: GridFunction) -> GridFunction:
    if isinstance(g, GridFunction):
        if not g.same_grid(A):
            g = g.resample(A.n)
        return g
    if isinstance(g, ComplexPolynomial):
        raise BackendMismatch("polynomial g with a grid coefficient")
    return GridFunction.sample(A.segment or A.path, g, A.n)


def next_coefficient(A, g):
    """``A - z A' + int_0^z g A`` on the backend of ``A``."""
    if isinstance(A, ComplexPolynomial):
        if not isinstance(g, ComplexPolynomial):
            if isinstance(g, Number):
                g = ComplexPolynomial([g])
            else:
                raise BackendMismatch("the polynomial backend needs a polynomial g")
        return A - A.derivative().times_z() + (g * A).antiderivative()
    if isinstance(A, GridFunction):
        if A.segment is None:
            raise BackendMismatch("grid coefficients live on a ray segment from the origin")
        gg = _as_grid_g(g, A)
        # rounding noise in the top Chebyshev modes would be amplified by
        # about N**2 per differentiation; drop it first
        A = A.with_values(cheb.chop(A.values, _CHOP_TOL))
        z = A.points
        return A - A.derivative() * A.with_values(z) + (gg * A).cumulative()
    raise BackendMismatch(f"unsupported coefficient type {type(A).__name__}")


def coefficients(g, order: int, backend: str = POLYNOMIAL,
                 segment: Optional[RaySegment] = None, n_nodes: int = 65) -> CoefficientSequence:
    """``A_0 .. A_{order-1}``; the grid backend samples on ``segment``."""
    if order < 1:
        raise ValueError("order must be at least 1")
    if backend == POLYNOMIAL:
        if isinstance(g, Number):
            g = ComplexPolynomial([g])
        if not isinstance(g, ComplexPolynomial):
            raise BackendMismatch("the polynomial backend needs a polynomial g")
        A0 = ComplexPolynomial([1])
    elif backend == GRID:
        if segment is None:
            raise ValueError("the grid backend needs a segment")
        A0 = GridFunction.constant(segment, 1.0, n_nodes)
        if isinstance(g, ComplexPolynomial):
            poly = g
            g = GridFunction.sample(segment, lambda z: poly(z), n_nodes)
        elif not isinstance(g, GridFunction):
            g = GridFunction.sample(segment, g, n_nodes)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return CoefficientSequence(backend, (A0,), g).extended(order)


def _terms(coeffs: CoefficientSequence, n: Optional[int]):
    n = coeffs.order if n is None else n
    if n > coeffs.order:
        coeffs = coeffs.extended(n)
    return coeffs, n


def _series(coeffs, base, z, n, deriv=False):
    coeffs, n = _terms(coeffs, n)
    total = 0j * np.asarray(z, dtype=complex) if isinstance(z, np.ndarray) else 0j
    scale = 1.0 + 0j
    for k in range(n):
        v = coeffs.derivative_value(k, z) if deriv else coeffs.value(k, z)
        total = total + v * scale
        scale = scale / base
    return total


def partial_sum_plus(coeffs, lam, z, n: Optional[int] = None):
    """``sum_{k<n} A_k(z) / (2 lam)**k`` (n defaults to all stored terms)."""
    lam = as_lambda(lam)
    return _series(coeffs, 2.0 * lam.value, z, n)


def partial_sum_plus_derivative(coeffs, lam, z, n: Optional[int] = None):
    lam = as_lambda(lam)
    return _series(coeffs, 2.0 * lam.value, z, n, deriv=True)


def _power(z, lam):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise OriginError("z**(1 - 2 lam) is singular at z = 0")
    return np.log(z) * (1.0 - 2.0 * lam.value)


def partial_sum_minus(coeffs, lam, z, n: Optional[int] = None):
    """``z**(1-2 lam) sum_{k<n} A_k(z) / (2(1-lam))**k``, principal branch."""
    lam = as_lambda(lam)
    logp = _power(z, lam)
    s = _series(coeffs, lam.reflected, z, n)
    out = _scaled_exp(logp, s)
    return out if np.ndim(z) else complex(out)


def partial_sum_minus_derivative(coeffs, lam, z, n: Optional[int] = None):
    """Derivative of :func:`partial_sum_minus`, product rule on ``z**(1-2 lam)``."""
    lam = as_lambda(lam)
    logp = _power(z, lam)
    s = _series(coeffs, lam.reflected, z, n)
    ds = _series(coeffs, lam.reflected, z, n, deriv=True)
    inner = ds - lam.two_lambda_minus_one * s / np.asarray(z, dtype=complex)
    out = _scaled_exp(logp, inner)
    return out if np.ndim(z) else complex(out)


def _scaled_exp(logp, s):
    # exp(logp) * s, combined in log form so that neither factor overflows alone
    s = np.asarray(s, dtype=complex)
    logp = np.asarray(logp, dtype=complex)
    with np.errstate(divide="ignore"):
        ls = np.log(np.where(s == 0, 1.0, s))
    out = np.exp(logp + ls)
    return np.where(s == 0, 0j, out)


def olver_remainder_bound(coeffs, g, lam, n: int, branch: str = "plus",
                          segment: Optional[RaySegment] = None) -> float:
    """``2 ||A_n'||_1 / (|2 lam - 1| |base|**(n-1)) * exp(2 ||g||_1 / |2 lam - 1|)``.

    ``base`` is ``2 lam`` (plus) or ``2 (1 - lam)`` (minus); the L1 norms are
    taken over ``segment`` (defaults to the grid backend's segment).
    """
    lam = as_lambda(lam)
    if branch not in ("plus", "minus"):
        raise ValueError("branch must be 'plus' or 'minus'")
    coeffs, _ = _terms(coeffs, n + 1)
    An = coeffs[n]
    if segment is None:
        if isinstance(An, GridFunction) and An.segment is not None:
            segment = An.segment
        else:
            raise ValueError("a segment is needed to measure the L1 norms")
    if isinstance(An, GridFunction):
        dA = An.derivative().resample(_NORM_NODES)
    else:
        poly = An.derivative()
        dA = GridFunction.sample(segment, lambda z: poly(z), _NORM_NODES)
    if isinstance(g, GridFunction):
        gg = g.resample(_NORM_NODES)
    elif isinstance(g, ComplexPolynomial):
        gg = GridFunction.sample(segment, lambda z: g(z), _NORM_NODES)
    elif isinstance(g, Number):
        gg = GridFunction.constant(segment, g, _NORM_NODES)
    else:
        gg = GridFunction.sample(segment, g, _NORM_NODES)
    a = abs(lam.two_lambda_minus_one)
    base = abs(2.0 * lam.value) if branch == "plus" else abs(lam.reflected)
    return float(2.0 * dA.l1_norm() / (a * base ** (n - 1)) * np.exp(2.0 * gg.l1_norm() / a))


class OlverApproximant:
    """``c_plus y_n^+ + c_minus y_n^-`` as a callable."""

    def __init__(self, coeffs: CoefficientSequence, lam: LargeParameter, n: int,
                 c_plus: complex, c_minus: complex = 0j):
        self.coeffs, self.n = _terms(coeffs, n)
        self.lam = lam
        self.c_plus = complex(c_plus)
        self.c_minus = complex(c_minus)

    def __call__(self, z):
        out = self.c_plus * partial_sum_plus(self.coeffs, self.lam, z, self.n)
        if self.c_minus != 0:
            out = out + self.c_minus * partial_sum_minus(self.coeffs, self.lam, z, self.n)
        return out

    def derivative(self, z):
        out = self.c_plus * partial_sum_plus_derivative(self.coeffs, self.lam, z, self.n)
        if self.c_minus != 0:
            out = out + self.c_minus * partial_sum_minus_derivative(self.coeffs, self.lam, z, self.n)
        return out

    def residual_forcing(self):
        """``h`` with ``z Y'' + 2 lam Y' - g Y = -h`` for this approximant Y."""
        coeffs, n, lam = self.coeffs, self.n, self.lam
        coeffs, _ = _terms(coeffs, n + 1)
        An = coeffs[n]
        dA = An.derivative()
        cp = self.c_plus / (2.0 * lam.value) ** (n - 1)
        cm = self.c_minus / lam.reflected ** (n - 1)

        def h(z):
            z = np.asarray(z, dtype=complex)
            out = cp * dA(z)
            if cm != 0:
                out = out + cm * _scaled_exp(_power(z, lam), dA(z))
            return out

        return h


def normalize_to_problem(coeffs, lam, problem: ProblemSpec, n: int) -> OlverApproximant:
    """Scale the order-n partial sums to the problem's initial data.

    Plus: ``c = y0 / y_n^+(0)``, and ``y_n^+(0) = sum_{k<n} (2 lam)**-k``
    because every ``A_k(0) = 1``. Minus: ``(c_plus, c_minus)`` match value and
    slope at the anchor.
    """
    validate_problem(problem)
    lam = as_lambda(lam)
    if n < 1:
        raise ValueError("n must be at least 1")
    if problem.kind.is_plus:
        base = 1.0 / (2.0 * lam.value)
        norm = sum(base ** k for k in range(n))
        return OlverApproximant(coeffs, lam, n, problem.y0 / norm)
    z0 = problem.anchor
    M = np.array([
        [partial_sum_plus(coeffs, lam, z0, n), partial_sum_minus(coeffs, lam, z0, n)],
        [partial_sum_plus_derivative(coeffs, lam, z0, n), partial_sum_minus_derivative(coeffs, lam, z0, n)],
    ], dtype=complex)
    scale = np.linalg.norm(M, axis=0)
    if np.any(scale == 0) or not np.all(np.isfinite(M)):
        raise SingularMatch("a partial sum vanishes identically at the anchor")
    Ms = M / scale[None, :]
    if np.linalg.cond(Ms) > 1e12:
        raise SingularMatch("value/slope matching at the anchor is singular")
    c = np.linalg.solve(Ms, np.array([problem.ybar0, problem.y1], dtype=complex)) / scale
    return OlverApproximant(coeffs, lam, n, c[0], c[1])


def olver_error(problem: ProblemSpec, approximant: OlverApproximant, tol: float = 1e-30,
                max_order: int = 200):
    """Error ``y - Y`` of a normalized approximant Y, as an ExpansionResult.

    The error solves the same equation with forcing ``h`` from
    :meth:`OlverApproximant.residual_forcing` and zero initial data, so it is
    computed directly rather than as a difference of nearly equal numbers.
    Only linear problems are supported.
    """
    from . import fixedpoint

    if not problem.kind.is_linear:
        raise ValueError("olver_error needs a linear problem")
    h = approximant.residual_forcing()
    if problem.kind.is_plus:
        err = ProblemSpec.linear_plus(problem.lam, problem.segment, problem.g, 0.0, forcing=h)
    else:
        err = ProblemSpec.linear_minus(
            problem.lam, problem.segment, problem.g, problem.anchor, 0.0, 0.0,
            target=problem.target, forcing=h, continuation=problem.continuation,
        )
    return fixedpoint.solve(err, tol=tol, max_order=max_order)
