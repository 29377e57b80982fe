from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpexpand import olver, specfun
from lpexpand.core import GridFunction, ProblemSpec, RaySegment
from lpexpand.exceptions import BackendMismatch, OriginError
from lpexpand.olver import ComplexPolynomial

small = st.floats(-2, 2, allow_nan=False)
cplx = st.builds(complex, small, small)


def one(z):
    return np.ones_like(z)


class TestComplexPolynomial:
    def test_exact_arithmetic(self):
        p = ComplexPolynomial([1, 2])
        q = ComplexPolynomial([0, 1, 3])
        assert (p * q).coefficients == (0, 1, 5, 6)
        assert (p + q) == ComplexPolynomial([1, 3, 3])
        assert (p - p).is_zero
        assert q.derivative() == ComplexPolynomial([1, 6])
        assert q.antiderivative() == ComplexPolynomial([0, 0, Fraction(1, 2), 1])
        assert p.times_z() == ComplexPolynomial([0, 1, 2])
        assert all(isinstance(c, Fraction) for c in q.antiderivative().coefficients)

    def test_immutable(self):
        p = ComplexPolynomial([1])
        with pytest.raises(AttributeError):
            p.coefficients = (2,)

    def test_evaluation_backends(self):
        p = ComplexPolynomial([1, Fraction(1, 3), 2j])
        z = np.array([0.5, 1j])
        assert np.allclose(p(z), 1 + z / 3 + 2j * z * z)
        mp.mp.dps = 40
        try:
            v = p(mp.mpf(1) / 3)
            assert isinstance(v, mp.mpc)
            assert abs(v - (1 + mp.mpf(1) / 9 + 2j * mp.mpf(1) / 9)) < mp.mpf(10) ** -38
        finally:
            mp.mp.dps = 15

    @given(st.lists(cplx, min_size=1, max_size=5), st.lists(cplx, min_size=1, max_size=5), cplx)
    def test_ring_laws(self, a, b, z):
        p, q = ComplexPolynomial(a), ComplexPolynomial(b)
        assert abs((p * q)(z) - p(z) * q(z)) <= 1e-9 * (1 + abs(p(z)) * abs(q(z)))
        assert abs((p + q)(z) - p(z) - q(z)) <= 1e-12 * (1 + abs(p(z)) + abs(q(z)))


@settings(max_examples=25, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=4))
def test_recurrence_identity(gc):
    g = ComplexPolynomial(gc)
    seq = olver.coefficients(g, 6)
    for n in range(5):
        A, B = seq[n], seq[n + 1]
        lhs = B - A + A.derivative().times_z()
        rhs = (g * A).antiderivative()
        z = 0.3 - 0.7j
        assert abs(lhs(z) - rhs(z)) <= 1e-10 * (1 + abs(rhs(z)))
        assert B(0) == 1


def test_grid_backend_matches_polynomials():
    seg = RaySegment(np.exp(0.4j), 1.5)
    g = ComplexPolynomial([1, 0.5j])
    exact = olver.coefficients(g, 6)
    grid = olver.coefficients(g, 6, olver.GRID, seg, 33)
    for k in range(6):
        A = grid[k]
        assert isinstance(A, GridFunction)
        want = exact[k](A.points)
        assert np.max(np.abs(A.values - want)) <= 1e-10 * np.max(np.abs(want))


def test_backend_mismatch():
    A = olver.coefficients(ComplexPolynomial([1]), 1)[0]
    with pytest.raises(BackendMismatch):
        olver.next_coefficient(A, np.cos)
    with pytest.raises(BackendMismatch):
        olver.coefficients(np.cos, 3)
    with pytest.raises(ValueError):
        olver.coefficients(ComplexPolynomial([1]), 0)


def test_partial_sums():
    seq = olver.coefficients(ComplexPolynomial([1]), 4)
    lam, z = 5.0, 0.7
    want = sum(seq[k](z) / 10 ** k for k in range(4))
    assert olver.partial_sum_plus(seq, lam, z) == pytest.approx(want)
    want = z ** -9 * sum(seq[k](z) / (-8) ** k for k in range(3))
    assert olver.partial_sum_minus(seq, lam, z, 3) == pytest.approx(want, rel=1e-14)
    with pytest.raises(OriginError):
        olver.partial_sum_minus(seq, lam, 0.0)
    # z**(1 - 2 lam) alone overflows here, the product does not
    v = olver.partial_sum_minus(seq, 200.0, 0.2, 2)
    assert np.isfinite(v)


def _residual(seq, lam, z, n, branch):
    if branch == "plus":
        base = 2 * lam
        pre = lambda z: 1
    else:
        base = 2 * (1 - lam)
        pre = lambda z: z ** (1 - 2 * lam)
    Y = lambda z: pre(z) * sum(seq[k](z) / base ** k for k in range(n))
    d1 = mp.diff(Y, z)
    d2 = mp.diff(Y, z, 2)
    return z * d2 + 2 * lam * d1 - Y(z), pre(z) * seq[n].derivative()(z) / base ** (n - 1)


@pytest.mark.parametrize("branch", ["plus", "minus"])
@pytest.mark.parametrize("n", [1, 2, 4])
def test_partial_sum_residual(branch, n):
    # z Y'' + 2 lam Y' - g Y = -A_n' / base**(n-1), times z**(1 - 2 lam) for the minus branch
    mp.mp.dps = 40
    try:
        g = ComplexPolynomial([mp.mpf(1)])
        seq = olver.coefficients(g, n + 1)
        lam = mp.mpc(7, 2)
        z = mp.mpc("0.6", "0.3")
        lhs, r = _residual(seq, lam, z, n, branch)
        assert abs(lhs + r) <= mp.mpf(10) ** -25 * abs(r)
    finally:
        mp.mp.dps = 15


def test_normalization_and_error_plus():
    lam, z = 5.0, -2.0
    p = ProblemSpec.linear_plus(lam, RaySegment.through(z), one, 1.0)
    for n in (1, 3, 5):
        Y = olver.normalize_to_problem(olver.coefficients(ComplexPolynomial([1]), n + 1), lam, p, n)
        assert Y(0.0) == pytest.approx(1.0, rel=1e-15)
        E = olver.olver_error(p, Y)
        ref = specfun.example_reference_plus(lam, z)
        assert abs(Y(z) + E.final(z) - ref) <= 1e-12 * abs(ref)


def test_normalization_and_error_minus():
    lam = 5.0
    yb = specfun.example_reference_minus(lam, 1.0)
    y1 = specfun.example_reference_minus_derivative(lam, 1.0)
    p = ProblemSpec.linear_minus(lam, RaySegment(1.0, 1.0), one, 1.0, yb, y1, target=0.5)
    Y = olver.normalize_to_problem(olver.coefficients(ComplexPolynomial([1]), 4), lam, p, 3)
    assert Y(1.0) == pytest.approx(yb, rel=1e-13)
    assert Y.derivative(1.0) == pytest.approx(y1, rel=1e-13)
    E = olver.olver_error(p, Y)
    ref = specfun.example_reference_minus(lam, 0.5)
    assert abs(Y(0.5) + E.final(0.5) - ref) <= 1e-11 * abs(ref)


@pytest.mark.parametrize("lam", [5, 20, 50 - 2j])
def test_remainder_bound_dominates_error(lam):
    seg = RaySegment(-1.0, 2.0)
    p = ProblemSpec.linear_plus(lam, seg, one, 1.0)
    for n in (1, 2, 4):
        seq = olver.coefficients(ComplexPolynomial([1]), n + 1)
        Y = olver.normalize_to_problem(seq, lam, p, n)
        E = olver.olver_error(p, Y)
        bound = olver.olver_remainder_bound(seq, ComplexPolynomial([1]), lam, n, "plus", seg)
        # the bound is stated for c = 1; Y carries c = y0 / y_n(0)
        assert E.final.sup_norm() <= bound * abs(Y.c_plus)


def test_remainder_bound_needs_segment():
    seq = olver.coefficients(ComplexPolynomial([1]), 3)
    with pytest.raises(ValueError):
        olver.olver_remainder_bound(seq, 1, 5, 2)
    with pytest.raises(ValueError):
        olver.olver_remainder_bound(seq, 1, 5, 2, branch="other", segment=RaySegment(1.0, 1.0))
