"""Green-kernel integrals on a ray segment or on a continuation path.

Plus kernel, for z on a ray segment from the origin::

    (z / a) * int_0^1 (1 - s**a) F(z s) ds,            a = 2 lam - 1

Minus kernel, for z on a path starting at the anchor z0::

    (1 / a) * int_{z0}^{z} (1 - (t / z)**a) F(t) dt

A :class:`KernelIntegralPlan` turns either integral, evaluated at every grid
node, into one dense matrix acting on the nodal values of F.
"""
import cmath
from functools import cached_property

import numpy as np

from . import chebyshev as cheb
from .core import (
    DEFAULT_NODES,
    GridFunction,
    Line,
    Path,
    RaySegment,
    as_lambda,
    as_path,
)
from .exceptions import AnchorOrder, GridMismatch, OffSegment

PLUS = "PlusKernel"
MINUS = "MinusKernel"

_SMALL_PANEL_NODES = 24


def _graded_rule(a: complex, n: int):
    """Composite Gauss--Legendre rule on [0, 1] for ``(1 - s**a) * smooth``.

    Panels shrink geometrically towards s = 0, where ``s**a`` is not smooth
    for small ``Re a``, and towards s = 1 on the scale ``1/|a|``, where
    ``s**a`` lives when ``|a|`` is large.
    """
    levels = int(np.ceil(60.0 / (a.real + 1.0))) + 1
    breaks = {0.0, 1.0}
    breaks.update(2.0 ** -k for k in range(1, levels + 1))
    if abs(a) > 4.0:
        h = 1.0 / abs(a)
        while h < 0.5:
            breaks.add(1.0 - h)
            h *= 2.0
    breaks = np.array(sorted(breaks))
    s_all, w_all = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        width = hi - lo
        m = _SMALL_PANEL_NODES if width < 0.125 else max(_SMALL_PANEL_NODES, n // 2 + 4)
        x, w = cheb.gauss_legendre(m)
        s_all.append(lo + width * x)
        w_all.append(width * w)
    s = np.concatenate(s_all)
    w = np.concatenate(w_all)
    kernel = 1.0 - np.exp(a * np.log(s))
    return s, w * kernel


def _path_logs(path: Path, n: int):
    """Principal logarithm at the nodes, checked to be continuous along the path."""
    z = path.points(n)
    if np.any(z == 0):
        raise OffSegment("the Minus kernel path must avoid the origin")
    L = np.log(z)
    flat = L.reshape(-1)
    if np.any(np.abs(np.diff(flat.imag)) > 0.5 * np.pi):
        raise OffSegment("the path crosses the branch cut of the logarithm")
    return L


def _cumulative_operator(path: Path, n: int):
    """Matrix of ``F -> int_{path start}^{node} F dt`` on the flattened grid."""
    Q = cheb.cumulative_matrix(n)
    J = path.jacobians(n)
    P = len(path.pieces)
    M = np.zeros((P * n, P * n), dtype=complex)
    for p in range(P):
        rows = slice(p * n, (p + 1) * n)
        for q in range(p):
            M[rows, q * n:(q + 1) * n] = (Q[-1] * J[q])[None, :]
        M[rows, p * n:(p + 1) * n] = Q * J[p][None, :]
    return M


class KernelIntegralPlan:
    """Precomputed kernel integral for one (domain, lambda, kind, grid size).

    Plans are immutable; the dense matrix is built lazily on first use.
    """

    def __init__(self, domain, lam, kind=PLUS, n=DEFAULT_NODES):
        if kind not in (PLUS, MINUS):
            raise ValueError(f"kind must be {PLUS!r} or {MINUS!r}")
        self.lam = as_lambda(lam)
        self.kind = kind
        self.n = int(n)
        self.path = as_path(domain)
        self.segment = domain if isinstance(domain, RaySegment) else None
        if kind == PLUS:
            if self.segment is None:
                raise TypeError("the Plus kernel needs a RaySegment")
        elif self.segment is not None:
            raise TypeError("the Minus kernel needs a path starting at the anchor")

    @classmethod
    def for_problem(cls, problem, n=DEFAULT_NODES):
        if problem.kind.is_plus:
            return cls(problem.segment, problem.lam, PLUS, n)
        return cls(problem.domain(), problem.lam, MINUS, n)

    @property
    def a(self) -> complex:
        return self.lam.two_lambda_minus_one

    @property
    def anchor(self) -> complex:
        return self.path.start

    @property
    def points(self):
        return self.path.points(self.n)

    @property
    def radii(self):
        return np.abs(self.points)

    @property
    def weights(self):
        """Clenshaw--Curtis weights for arc length, shape ``(pieces, N)``."""
        return np.abs(self.path.jacobians(self.n)) * cheb.clenshaw_curtis_weights(self.n)[None, :]

    def check(self, F: GridFunction):
        if not isinstance(F, GridFunction) or F.path != self.path or F.n != self.n:
            raise GridMismatch("F is not sampled on the plan's grid")

    @cached_property
    def _rule(self):
        return _graded_rule(self.a, self.n)

    @cached_property
    def matrix(self):
        if self.kind == PLUS:
            return self._plus_matrix()
        return self._minus_matrix()

    def _plus_matrix(self):
        s, kw = self._rule
        x = cheb.nodes(self.n)
        rho = 0.5 * (1.0 + x)
        z = self.points[0]
        M = np.zeros((self.n, self.n), dtype=complex)
        for i in range(1, self.n):
            P = cheb.interpolation_matrix(self.n, 2.0 * rho[i] * s - 1.0)
            M[i] = (z[i] / self.a) * (kw @ P)
        return M

    def _minus_matrix(self):
        a = self.a
        L = _path_logs(self.path, self.n).reshape(-1)
        L0 = L[0]
        E = np.exp(a * (L - L0))
        Einv = np.exp(-a * (L - L0))
        if not np.all(np.isfinite(Einv)):
            raise OverflowError("(z0/z)**a overflows on this path")
        C = _cumulative_operator(self.path, self.n)
        return (C - Einv[:, None] * (C * E[None, :])) / a

    def apply(self, F: GridFunction) -> GridFunction:
        """Kernel integral at every node of the grid."""
        self.check(F)
        out = self.matrix @ F.values.reshape(-1)
        return F.with_values(out.reshape(F.values.shape))

    def resized(self, n) -> "KernelIntegralPlan":
        domain = self.segment if self.segment is not None else self.path
        return KernelIntegralPlan(domain, self.lam, self.kind, n)


def apply_plus_kernel(plan: KernelIntegralPlan, F: GridFunction, z) -> complex:
    """``(z/a) int_0^1 (1 - s**a) F(z s) ds`` for one point z of the segment."""
    if plan.kind != PLUS:
        raise TypeError("plan is not a Plus-kernel plan")
    plan.check(F)
    seg = plan.segment
    z = complex(z)
    rho = seg.radius_of(z) / seg.radius
    if rho == 0.0:
        return 0j
    s, kw = plan._rule
    P = cheb.interpolation_matrix(plan.n, 2.0 * rho * s - 1.0)
    return complex((z / plan.a) * (kw @ (P @ F.values[0])))


def apply_minus_kernel(plan: KernelIntegralPlan, F: GridFunction, z, z0=None) -> complex:
    """``(1/a) int_{z0}^{z} (1 - (t/z)**a) F(t) dt`` along the plan's path.

    Works independently of the plan matrix: the integral is re-gridded on the
    sub-path from z0 to z with Gauss--Legendre nodes and F is interpolated
    there.
    """
    if plan.kind != MINUS:
        raise TypeError("plan is not a Minus-kernel plan")
    plan.check(F)
    path = plan.path
    z = complex(z)
    z0 = path.start if z0 is None else complex(z0)
    if z0 != path.start:
        raise GridMismatch("z0 must be the start of the plan's path")
    if z == z0:
        return 0j
    if abs(z) >= abs(z0) and len(path.pieces) == 1 and isinstance(path.pieces[0], Line):
        try:
            path.locate(z)
        except OffSegment:
            raise AnchorOrder(f"need |z| < |z0|, got |z| = {abs(z)}, |z0| = {abs(z0)}") from None
    piece, u_end = path.locate(z)
    a = plan.a
    Lz = cmath.log(z)
    m = max(plan.n, 64) + 64
    x, w = cheb.gauss_legendre(m)
    total = 0j
    for p in range(piece + 1):
        hi = u_end if p == piece else 1.0
        if hi <= -1.0:
            continue
        u = -1.0 + (hi + 1.0) * x
        wu = (hi + 1.0) * w
        pc = path.pieces[p]
        t = pc.at(u)
        jac = pc.jacobian(u)
        Fi = cheb.interpolation_matrix(plan.n, u) @ F.values[p]
        kernel = 1.0 - np.exp(a * (np.log(t) - Lz))
        total += np.sum(wu * jac * kernel * Fi)
    return complex(total / a)


def kernel_bound_check(plan: KernelIntegralPlan) -> float:
    """Largest kernel modulus over ordered pairs of grid nodes.

    Plus: ``|1 - (t/z)**a|`` with t between 0 and z. Minus: ``|(z/t)**a - 1|``
    with t between z0 and z, the form the kernel takes after rescaling by
    ``z**a``. Both are at most 2 when ``Re a > 0`` and the pairs lie on a ray.
    """
    a = plan.a
    if plan.kind == PLUS:
        r = plan.radii[0]
        R = r[None, :] / np.where(r[:, None] > 0, r[:, None], 1.0)  # t / z, rows z
        mask = (r[:, None] > 0) & (r[None, :] <= r[:, None])
        safe = np.where(mask & (R > 0), R, 1.0)
        powers = np.where(R > 0, np.exp(a * np.log(safe)), 0.0)
        vals = np.abs(1.0 - powers)
        return float(vals[mask].max()) if mask.any() else 0.0
    L = _path_logs(plan.path, plan.n).reshape(-1)
    # t runs over nodes up to and including z along the path
    diff = L[:, None] - L[None, :]  # log(z) - log(t), rows z
    order = np.arange(L.size)
    mask = order[None, :] <= order[:, None]
    vals = np.abs(np.exp(a * diff) - 1.0)
    return float(vals[mask].max())


def l1_norm(F: GridFunction) -> float:
    """``int |F(t)| |dt|`` over the path by Clenshaw--Curtis."""
    return F.l1_norm()


def sup_norm(F: GridFunction) -> float:
    return F.sup_norm()


def differentiate(F: GridFunction) -> GridFunction:
    """Spectral derivative with respect to the complex variable along the path."""
    return F.derivative()
