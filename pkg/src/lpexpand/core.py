"""Shared types: the large parameter, segments and paths, grid functions, problems.

Everything here is immutable. Grid functions store read-only arrays and
return new objects from every operation.
"""
import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from . import chebyshev as cheb
from .exceptions import (
    AnchorOrder,
    DomainError,
    GridMismatch,
    InvalidAnchor,
    InvalidLambda,
    OffSegment,
)

DEFAULT_NODES = 65

# relative tolerance used to decide whether a point lies on a piece of path
_ON_PATH_RTOL = 1e-12


# --------------------------------------------------------------------------
# large parameter
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LargeParameter:
    """Complex parameter with ``Re(value) > 1/2``."""

    value: complex

    def __post_init__(self):
        value = complex(self.value)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise InvalidLambda(f"lambda must be finite, got {value!r}")
        if not value.real > 0.5:
            raise InvalidLambda(f"need Re(lambda) > 1/2, got lambda = {value!r}")
        object.__setattr__(self, "value", value)

    @property
    def two_lambda_minus_one(self) -> complex:
        return 2.0 * self.value - 1.0

    @property
    def reflected(self) -> complex:
        """``2 (1 - lambda)``, the expansion base of the second solution."""
        return 2.0 * (1.0 - self.value)

    @classmethod
    def from_tilde(cls, tilde_lambda) -> "LargeParameter":
        return lambda_from_tilde(tilde_lambda)

    def __complex__(self):
        return self.value


def lambda_from_tilde(tilde_lambda) -> LargeParameter:
    """Map the original parameter to ``(1 + sqrt(4 t**2 + 1)) / 2`` (principal root).

    The result satisfies ``lam * (lam - 1) == tilde_lambda**2``.
    """
    t = complex(tilde_lambda)
    lam = 0.5 * (1.0 + cmath.sqrt(4.0 * t * t + 1.0))
    if not lam.real > 0.5:
        raise DomainError(
            f"tilde lambda {t!r} maps to lambda = {lam!r} with Re <= 1/2"
        )
    return LargeParameter(lam)


def as_lambda(lam) -> LargeParameter:
    return lam if isinstance(lam, LargeParameter) else LargeParameter(lam)


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Line:
    """Straight piece from ``start`` to ``end``, parametrized by u in [-1, 1]."""

    start: complex
    end: complex

    @property
    def length(self) -> float:
        return abs(self.end - self.start)

    def at(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * (self.start + self.end) + 0.5 * (self.end - self.start) * u

    def jacobian(self, u):
        return np.full(np.shape(u), 0.5 * (self.end - self.start), dtype=complex)

    def locate(self, z) -> Optional[float]:
        d = self.end - self.start
        q = (complex(z) - self.start) / d
        tol = _ON_PATH_RTOL * max(1.0, abs(self.start), abs(self.end)) / abs(d)
        if abs(q.imag) > tol or q.real < -tol or q.real > 1.0 + tol:
            return None
        return min(1.0, max(-1.0, 2.0 * q.real - 1.0))


@dataclass(frozen=True)
class Arc:
    """Circular piece ``radius * exp(i theta)``, theta from ``theta0`` to ``theta1``.

    Both angles must lie in (-pi, pi] so the principal logarithm is
    continuous along the arc.
    """

    radius: float
    theta0: float
    theta1: float

    @property
    def length(self) -> float:
        return self.radius * abs(self.theta1 - self.theta0)

    @property
    def start(self) -> complex:
        return self.radius * cmath.exp(1j * self.theta0)

    @property
    def end(self) -> complex:
        return self.radius * cmath.exp(1j * self.theta1)

    def _theta(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * (self.theta0 + self.theta1) + 0.5 * (self.theta1 - self.theta0) * u

    def at(self, u):
        return self.radius * np.exp(1j * self._theta(u))

    def jacobian(self, u):
        return 0.5j * (self.theta1 - self.theta0) * self.at(u)

    def locate(self, z) -> Optional[float]:
        z = complex(z)
        if abs(abs(z) - self.radius) > _ON_PATH_RTOL * max(1.0, self.radius):
            return None
        lo, hi = sorted((self.theta0, self.theta1))
        th = cmath.phase(z)
        tol = 1e-12
        if th < lo - tol or th > hi + tol:
            return None
        q = (th - self.theta0) / (self.theta1 - self.theta0)
        return min(1.0, max(-1.0, 2.0 * q - 1.0))


@dataclass(frozen=True)
class Path:
    """Contiguous chain of :class:`Line` and :class:`Arc` pieces."""

    pieces: Tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ValueError("a path needs at least one piece")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.end - b.start) > 1e-12 * max(1.0, abs(a.end)):
                raise ValueError("path pieces are not contiguous")
        object.__setattr__(self, "pieces", pieces)

    @property
    def start(self) -> complex:
        return self.pieces[0].start

    @property
    def end(self) -> complex:
        return self.pieces[-1].end

    @property
    def length(self) -> float:
        return sum(p.length for p in self.pieces)

    def points(self, n):
        x = cheb.nodes(n)
        return np.stack([p.at(x) for p in self.pieces])

    def jacobians(self, n):
        x = cheb.nodes(n)
        return np.stack([p.jacobian(x) for p in self.pieces])

    def locate(self, z):
        """Return ``(piece_index, u)`` for a point on the path, else raise OffSegment."""
        for i, p in enumerate(self.pieces):
            u = p.locate(z)
            if u is not None:
                return i, u
        raise OffSegment(f"point {complex(z)!r} is not on the path")

    def avoids_origin(self) -> bool:
        for p in self.pieces:
            if isinstance(p, Arc):
                if p.radius <= 0.0:
                    return False
            elif p.locate(0.0) is not None:
                return False
        return True


@dataclass(frozen=True)
class RaySegment:
    """Segment ``{r * direction : 0 <= r <= radius}`` anchored at the origin."""

    direction: complex
    radius: float

    def __post_init__(self):
        d = complex(self.direction)
        if abs(abs(d) - 1.0) > 1e-12:
            raise ValueError(f"direction must be a unit complex number, got {d!r}")
        d = d / abs(d)
        r = float(self.radius)
        if not (r > 0.0 and math.isfinite(r)):
            raise ValueError("radius must be positive and finite")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "radius", r)

    @classmethod
    def through(cls, z, radius=None) -> "RaySegment":
        """Segment pointing at ``z``; radius defaults to ``|z|``."""
        z = complex(z)
        if z == 0:
            raise DomainError("cannot build a ray through the origin")
        return cls(z / abs(z), abs(z) if radius is None else radius)

    def point(self, r):
        return np.asarray(r, dtype=float) * self.direction

    def radius_of(self, z) -> float:
        """Parameter r of a point on the segment; raises OffSegment otherwise."""
        z = complex(z)
        q = z * self.direction.conjugate()
        tol = _ON_PATH_RTOL * max(1.0, self.radius)
        if abs(q.imag) > tol or q.real < -tol or q.real > self.radius * (1 + 1e-12) + tol:
            raise OffSegment(f"point {z!r} is not on the segment")
        return min(self.radius, max(0.0, q.real))

    def contains(self, z) -> bool:
        try:
            self.radius_of(z)
        except OffSegment:
            return False
        return True

    def ratio(self, t, z) -> float:
        """``t / z`` for two points of the segment, as the positive real ``r_t / r_z``."""
        return self.radius_of(t) / self.radius_of(z)

    @property
    def path(self) -> Path:
        return Path((Line(0j, self.radius * self.direction),))


def as_path(domain) -> Path:
    return domain.path if isinstance(domain, RaySegment) else domain


# --------------------------------------------------------------------------
# grid functions
# --------------------------------------------------------------------------


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Function sampled at Chebyshev--Lobatto nodes of every piece of a path.

    ``values`` has shape ``(pieces, N)``. On a :class:`RaySegment` there is a
    single piece whose nodes are the radii ``radius * (1 + x_j) / 2``.
    """

    path: Path
    values: np.ndarray
    segment: Optional[RaySegment] = None

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.ndim == 1:
            vals = vals.reshape(1, -1)
        if vals.shape[0] != len(self.path.pieces):
            raise GridMismatch("one row of samples per path piece is required")
        object.__setattr__(self, "values", vals)

    # construction ---------------------------------------------------------

    @classmethod
    def sample(cls, domain, func, n=DEFAULT_NODES) -> "GridFunction":
        path = as_path(domain)
        seg = domain if isinstance(domain, RaySegment) else None
        z = path.points(n)
        vals = _vectorized(func)(z)
        return cls(path, np.broadcast_to(vals, z.shape), seg)

    @classmethod
    def constant(cls, domain, value, n=DEFAULT_NODES) -> "GridFunction":
        path = as_path(domain)
        seg = domain if isinstance(domain, RaySegment) else None
        return cls(path, np.full((len(path.pieces), n), complex(value)), seg)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.path, values, self.segment)

    # grid data ------------------------------------------------------------

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def points(self):
        return self.path.points(self.n)

    @property
    def nodes(self):
        """Radii of the nodes (ray segments only)."""
        if self.segment is None:
            raise GridMismatch("node radii are only defined on a ray segment")
        return self.segment.radius * 0.5 * (1.0 + cheb.nodes(self.n))

    def same_grid(self, other) -> bool:
        return isinstance(other, GridFunction) and other.path == self.path and other.n == self.n

    def _check(self, other):
        if not self.same_grid(other):
            raise GridMismatch("grid functions live on different grids")

    # evaluation -----------------------------------------------------------

    def __call__(self, z):
        z_arr = np.asarray(z, dtype=complex)
        flat = z_arr.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        located = [self.path.locate(p) for p in flat]
        for piece in range(len(self.path.pieces)):
            idx = [k for k, (i, _) in enumerate(located) if i == piece]
            if not idx:
                continue
            u = [located[k][1] for k in idx]
            out[idx] = cheb.interpolation_matrix(self.n, u) @ self.values[piece]
        if z_arr.ndim == 0:
            return complex(out[0])
        return out.reshape(z_arr.shape)

    def resample(self, n) -> "GridFunction":
        """Interpolate onto an ``n``-node grid of the same path."""
        if n == self.n:
            return self
        P = cheb.interpolation_matrix(self.n, cheb.nodes(n))
        return self.with_values(self.values @ P.T)

    # calculus -------------------------------------------------------------

    def derivative(self) -> "GridFunction":
        D = cheb.differentiation_matrix(self.n)
        return self.with_values((self.values @ D.T) / self.path.jacobians(self.n))

    def cumulative(self) -> "GridFunction":
        """Integral along the path from its start to every node."""
        Q = cheb.cumulative_matrix(self.n)
        local = (self.values * self.path.jacobians(self.n)) @ Q.T
        offsets = np.concatenate([[0.0], np.cumsum(local[:-1, -1])])
        return self.with_values(local + offsets[:, None])

    def integral(self) -> complex:
        w = cheb.clenshaw_curtis_weights(self.n)
        return complex(np.sum((self.values * self.path.jacobians(self.n)) @ w))

    def l1_norm(self) -> float:
        w = cheb.clenshaw_curtis_weights(self.n)
        jac = np.abs(self.path.jacobians(self.n))
        return float(np.sum((np.abs(self.values) * jac) @ w))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def chebyshev_coefficients(self):
        return cheb.coefficients(self.values)

    def tail(self) -> float:
        return cheb.tail_ratio(self.values)

    # arithmetic -----------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, GridFunction):
            self._check(other)
            return self.with_values(op(self.values, other.values))
        return self.with_values(op(self.values, complex(other)))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return self.with_values(-self.values)

    def map(self, func) -> "GridFunction":
        """Apply ``func(z, value)`` pointwise."""
        return self.with_values(_vectorized2(func)(self.points, self.values))


def _vectorized(func):
    def call(z):
        try:
            out = np.asarray(func(z), dtype=complex)
            if out.shape in ((), z.shape):
                return out
        except (TypeError, ValueError):
            pass
        return np.vectorize(lambda t: complex(func(complex(t))), otypes=[complex])(z)

    return call


def _vectorized2(func):
    def call(z, y):
        try:
            out = np.asarray(func(z, y), dtype=complex)
            if out.shape in ((), z.shape):
                return np.broadcast_to(out, z.shape)
        except (TypeError, ValueError):
            pass
        return np.vectorize(
            lambda t, v: complex(func(complex(t), complex(v))), otypes=[complex]
        )(z, y)

    return call


# --------------------------------------------------------------------------
# problems
# --------------------------------------------------------------------------


class ProblemKind(enum.Enum):
    LINEAR_PLUS = "LinearPlus"
    LINEAR_MINUS = "LinearMinus"
    NONLINEAR_PLUS = "NonlinearPlus"
    NONLINEAR_MINUS = "NonlinearMinus"

    @property
    def is_plus(self) -> bool:
        return self in (ProblemKind.LINEAR_PLUS, ProblemKind.NONLINEAR_PLUS)

    @property
    def is_linear(self) -> bool:
        return self in (ProblemKind.LINEAR_PLUS, ProblemKind.LINEAR_MINUS)


@dataclass(frozen=True)
class ProblemSpec:
    """Initial value problem for ``z y'' + 2 lam y' = rhs``.

    Linear kinds use ``rhs = g(z) y + forcing(z)`` (forcing defaults to 0),
    nonlinear kinds ``rhs = f(z, y)`` with Lipschitz constant ``lipschitz``.
    Plus kinds carry ``y0 = y(0)``; Minus kinds carry ``ybar0 = y(anchor)`` and
    ``y1 = y'(anchor)`` and are solved on the path from ``anchor`` to
    ``target``. A target off the anchor ray, or farther from the origin than
    the anchor, is reached by an arc of radius ``|anchor|`` followed by a
    radial piece, and only when ``continuation`` is set.
    """

    kind: ProblemKind
    lam: LargeParameter
    segment: RaySegment
    g: Optional[Callable] = None
    f: Optional[Callable] = None
    lipschitz: Optional[float] = None
    anchor: complex = 0j
    y0: Optional[complex] = None
    ybar0: Optional[complex] = None
    y1: Optional[complex] = None
    forcing: Optional[Callable] = None
    target: Optional[complex] = None
    continuation: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lam", as_lambda(self.lam))
        object.__setattr__(self, "anchor", complex(self.anchor))
        for name in ("y0", "ybar0", "y1", "target"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, complex(v))

    # constructors ----------------------------------------------------------

    @classmethod
    def linear_plus(cls, lam, segment, g, y0, forcing=None):
        return cls(ProblemKind.LINEAR_PLUS, lam, segment, g=g, y0=y0, forcing=forcing)

    @classmethod
    def linear_minus(cls, lam, segment, g, anchor, ybar0, y1, target=None,
                     forcing=None, continuation=False):
        return cls(ProblemKind.LINEAR_MINUS, lam, segment, g=g, anchor=anchor,
                   ybar0=ybar0, y1=y1, target=target, forcing=forcing,
                   continuation=continuation)

    @classmethod
    def nonlinear_plus(cls, lam, segment, f, lipschitz, y0):
        return cls(ProblemKind.NONLINEAR_PLUS, lam, segment, f=f,
                   lipschitz=lipschitz, y0=y0)

    @classmethod
    def nonlinear_minus(cls, lam, segment, f, lipschitz, anchor, ybar0, y1,
                        target=None, continuation=False):
        return cls(ProblemKind.NONLINEAR_MINUS, lam, segment, f=f,
                   lipschitz=lipschitz, anchor=anchor, ybar0=ybar0, y1=y1,
                   target=target, continuation=continuation)

    # geometry ---------------------------------------------------------------

    @property
    def end(self) -> complex:
        """Far end of the solve domain, as seen from the initial point."""
        if self.kind.is_plus:
            return self.segment.radius * self.segment.direction
        if self.target is not None:
            return self.target
        return 0.5 * self.anchor

    @property
    def on_ray(self) -> bool:
        """Whether a Minus target lies on the anchor ray strictly inside the anchor."""
        z = self.end
        if not self.segment.contains(z):
            return False
        return 0.0 < self.segment.radius_of(z) < abs(self.anchor)

    def domain(self) -> Path:
        """Path on which the iterates are sampled.

        Minus paths are cut into pieces over which ``t**a`` changes by at
        most a factor ``e**4`` in modulus and 4 radians in phase; on each
        piece the iterates then vary over a modest range and their Chebyshev
        representations keep local relative accuracy.
        """
        if self.kind.is_plus:
            return self.segment.path
        return subdivide(self._route(), self.lam.two_lambda_minus_one)

    def _route(self) -> Path:
        z0, z = self.anchor, self.end
        if self.on_ray:
            return Path((Line(z0, z),))
        th0, th1 = cmath.phase(z0), cmath.phase(z)
        pieces = []
        if th0 != th1:
            pieces.append(Arc(abs(z0), th0, th1))
        corner = abs(z0) * cmath.exp(1j * th1)
        if abs(z - corner) > 0.0:
            pieces.append(Line(corner, z))
        return Path(tuple(pieces))

    def rhs(self, z, y):
        """Right-hand side of the equation evaluated at grid samples."""
        if self.kind.is_linear:
            out = _vectorized(self.g)(z) * y
            if self.forcing is not None:
                out = out + _vectorized(self.forcing)(z)
            return out
        return _vectorized2(self.f)(z, y)


def subdivide(path: Path, a: complex, budget: float = 4.0) -> Path:
    """Split every piece so that ``|a| * |log(end / start)| <= budget``.

    Radial lines are cut geometrically and arcs uniformly in angle, which
    makes the pieces equal in ``log t``.
    """
    out = []
    for p in path.pieces:
        spread = abs(a) * abs(cmath.log(p.end / p.start)) if p.start != 0 else 0.0
        m = max(1, int(math.ceil(spread / budget)))
        if m == 1:
            out.append(p)
        elif isinstance(p, Arc):
            th = np.linspace(p.theta0, p.theta1, m + 1)
            out.extend(Arc(p.radius, th[k], th[k + 1]) for k in range(m))
        else:
            q = p.end / p.start
            radial = abs(q.imag) <= 1e-14 * abs(q) and q.real > 0
            if radial:
                cuts = [p.start * q ** (k / m) for k in range(m + 1)]
            else:
                cuts = [p.start + (p.end - p.start) * k / m for k in range(m + 1)]
            cuts[0], cuts[-1] = p.start, p.end
            out.extend(Line(cuts[k], cuts[k + 1]) for k in range(m))
    return Path(tuple(out))


def validate_problem(spec: ProblemSpec) -> ProblemSpec:
    """Check every ProblemSpec invariant and return the spec unchanged."""
    if not isinstance(spec.lam, LargeParameter):
        raise InvalidLambda("lam must be a LargeParameter")
    linear = spec.kind.is_linear
    if linear and spec.g is None:
        raise DomainError("linear problems need g")
    if not linear:
        if spec.f is None:
            raise DomainError("nonlinear problems need f")
        L = spec.lipschitz
        if L is None or not (math.isfinite(L) and L > 0):
            raise DomainError("nonlinear problems need a finite Lipschitz constant L > 0")
    if spec.kind.is_plus:
        if spec.y0 is None or spec.ybar0 is not None or spec.y1 is not None:
            raise DomainError("Plus problems carry exactly one datum y0")
        if spec.anchor != 0:
            raise InvalidAnchor("Plus problems are anchored at z = 0")
        return spec
    if spec.y0 is not None or spec.ybar0 is None or spec.y1 is None:
        raise DomainError("Minus problems carry exactly two data (ybar0, y1)")
    if spec.anchor == 0:
        raise InvalidAnchor(
            "Minus problems need an anchor z0 != 0; the kernel integrals are "
            "meaningless with z0 = 0"
        )
    if not spec.segment.contains(spec.anchor):
        raise OffSegment(f"anchor {spec.anchor!r} is not on the segment")
    z = spec.end
    if z == 0:
        raise AnchorOrder("a Minus target must differ from the origin")
    if not spec.on_ray:
        if not spec.continuation:
            if spec.segment.contains(z):
                raise AnchorOrder(
                    f"target {z!r} must satisfy 0 < |z| < |z0| = {abs(spec.anchor)}"
                )
            raise OffSegment(f"target {z!r} is off the anchor ray")
        if not spec._route().avoids_origin():
            raise OffSegment("continuation path passes through the origin")
    return spec


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ExpansionResult:
    """Iterates ``y_0 .. y_n`` of a fixed-point expansion.

    ``differences[k]`` is ``y_{k+1} - y_k`` computed directly from the
    increment recursion, so it keeps full relative accuracy even after the
    increments drop below the rounding level of the iterates.
    """

    iterates: Tuple[GridFunction, ...]
    increments: Tuple[float, ...]
    apriori_bound: float
    converged: bool
    order_used: int
    differences: Tuple[GridFunction, ...] = field(default=())
    problem: Optional[ProblemSpec] = None

    def __post_init__(self):
        if len(self.increments) != self.order_used:
            raise ValueError("increments must have length order_used")
        if not (self.apriori_bound >= 0 and math.isfinite(self.apriori_bound)):
            raise ValueError("apriori_bound must be finite and nonnegative")

    @property
    def final(self) -> GridFunction:
        return self.iterates[-1]

    def tail(self, n, z):
        """``y_final(z) - y_n(z)`` summed from the stored differences."""
        diffs = self.differences[n:]
        if not diffs:
            return 0j if np.ndim(z) == 0 else np.zeros(np.shape(z), dtype=complex)
        # smallest terms first
        total = diffs[-1](z)
        for d in reversed(diffs[:-1]):
            total = total + d(z)
        return total


def sample_points(domain, points: Sequence[complex]):
    """Validate that every point lies on the path; returns them as an array."""
    path = as_path(domain)
    arr = np.asarray(points, dtype=complex)
    for p in arr.reshape(-1):
        path.locate(p)
    return arr
