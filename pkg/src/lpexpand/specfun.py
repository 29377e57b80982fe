"""Complex Gamma, the 0F1 series and modified Bessel functions of complex order.

These are the reference solutions for the ``g = 1`` model problem:

* ``y+(z) = 0F1(; 2 lam; z)``, bounded at the origin with ``y+(0) = 1``;
* ``y-(z) = z**(1/2 - lam) * K_{2 lam - 1}(2 sqrt(z))``.

Large-order values are carried as complex logarithms until the last step.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import as_lambda
from .exceptions import AccuracyError, DomainError, NoConvergence, PoleError


@dataclass(frozen=True)
class SpecFunConfig:
    series_tol: float = 1e-16
    max_terms: int = 500
    # trapezoid step for the K integral
    quad_step: float = 1e-2
    # the K integrand is truncated where it has dropped by exp(-quad_cutoff)
    # relative to its peak; 41.4 puts the cut below 1e-18
    quad_cutoff: float = 41.4

    def __post_init__(self):
        if not self.series_tol > 0:
            raise ValueError("series_tol must be positive")
        if self.max_terms < 10:
            raise ValueError("max_terms must be at least 10")
        if not self.quad_step > 0:
            raise ValueError("quad_step must be positive")
        if not self.quad_cutoff > 0:
            raise ValueError("quad_cutoff must be positive")


DEFAULT_CONFIG = SpecFunConfig()

# Lanczos coefficients, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def _lanczos_log_gamma(z: complex) -> complex:
    # valid for Re z >= 1/2
    z = z - 1.0
    a = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        a += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(a)


def log_gamma(z) -> complex:
    """Principal branch of log Gamma (cut along the negative real axis).

    Uses the Lanczos approximation for ``Re z >= 1/2`` and the upward
    recurrence ``log Gamma(z) = log Gamma(z + m) - sum Log(z + k)`` elsewhere,
    which is the analytic continuation from the positive axis.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real >= 0.5:
        return _lanczos_log_gamma(z)
    m = int(math.ceil(0.5 - z.real))
    shift = sum(cmath.log(z + k) for k in range(m))
    return _lanczos_log_gamma(z + m) - shift


def gamma(z) -> complex:
    return cmath.exp(log_gamma(z))


def hyp0f1(b, z, config: Optional[SpecFunConfig] = None) -> complex:
    """Confluent limit series ``sum z**k / (k! (b)_k)``."""
    cfg = config or DEFAULT_CONFIG
    b, z = complex(b), complex(z)
    if _is_nonpositive_integer(b):
        raise PoleError(f"0F1 undefined for b = {b.real:g}")
    term = 1.0 + 0j
    total = term
    if z == 0:
        return total
    for k in range(cfg.max_terms):
        ratio = z / ((k + 1) * (b + k))
        term *= ratio
        total += term
        # stop only once the terms are shrinking fast
        if abs(term) <= cfg.series_tol * abs(total) and abs(ratio) < 0.5:
            return total
    raise NoConvergence(f"0F1({b}; {z}) needs more than {cfg.max_terms} terms")


def log_bessel_i(nu, x, config: Optional[SpecFunConfig] = None) -> complex:
    """Complex logarithm of ``I_nu(x)`` (principal value of ``x**nu``)."""
    nu, x = complex(nu), complex(x)
    if x == 0:
        raise DomainError("I_nu(x) is evaluated in log form only for x != 0")
    if _is_nonpositive_integer(nu + 1.0):
        # I_{-n} = I_n
        nu = -nu
    series = hyp0f1(nu + 1.0, 0.25 * x * x, config)
    if series == 0:
        raise DomainError("I_nu(x) vanishes; no logarithm")
    return nu * cmath.log(0.5 * x) - log_gamma(nu + 1.0) + cmath.log(series)


def bessel_i(nu, x, config: Optional[SpecFunConfig] = None) -> complex:
    """Modified Bessel function of the first kind, principal branch."""
    nu, x = complex(nu), complex(x)
    if x == 0:
        if nu == 0:
            return 1.0 + 0j
        if nu.real > 0 or (_is_nonpositive_integer(-nu)):
            return 0j
        raise DomainError(f"I_nu(0) is infinite for nu = {nu}")
    return _exp(log_bessel_i(nu, x, config))


def _exp(w: complex) -> complex:
    try:
        return cmath.exp(w)
    except OverflowError:
        raise OverflowError(f"value exp({w}) exceeds the floating range") from None


# a contour is (c, r, h, w): t(s) = s + i (c tanh(s) + h sech^2((s - r) / w))
# The tanh term fixes the directions in which the integrand decays at both
# ends; the bump lets the contour pass over a saddle point of the exponent.
_K_GOOD_LOSS = 4.0


def _k_contour_log_integrand(s, nu, x, contour):
    c, r, h, w = contour
    u = (s - r) / w
    sech2 = 1.0 / np.cosh(u) ** 2
    t = s + 1j * (c * np.tanh(s) + h * sech2)
    dt = 1.0 + 1j * (c / np.cosh(s) ** 2 - 2.0 * h * sech2 * np.tanh(u) / w)
    return -x * np.cosh(t) + nu * t + np.log(dt)


def _k_window(nu, x, contour, cutoff):
    # grow [-S, S] until both ends are far below the peak
    S = 4.0
    for _ in range(40):
        s = np.linspace(-S, S, int(40 * S) + 1)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            lr = _k_contour_log_integrand(s, nu, x, contour).real
        lr = np.where(np.isfinite(lr), lr, -np.inf)
        peak = lr.max()
        keep = np.nonzero(lr >= peak - cutoff - 5.0)[0]
        if keep[0] > 0 and keep[-1] < len(s) - 1:
            return s[max(keep[0] - 1, 0)], s[min(keep[-1] + 1, len(s) - 1)]
        S *= 1.5
    return None


def _k_trapezoid(nu, x, contour, lo, hi, step):
    n = int(math.ceil((hi - lo) / step))
    s = np.linspace(lo, hi, n + 1)
    h = (hi - lo) / n
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        lw = _k_contour_log_integrand(s, nu, x, contour)
    lw = np.where(np.isfinite(lw.real), lw, -np.inf + 0j)
    peak = lw.real.max()
    w = np.exp(lw - peak)
    w[0] *= 0.5
    w[-1] *= 0.5
    total = 0.5 * h * w.sum()
    return peak, total


def _k_contours(nu, x):
    ax = cmath.phase(x)
    limit = 0.5 * math.pi - 0.2
    theta = min(max(cmath.phase(nu) if nu != 0 else 0.0, -limit), limit)
    ts = cmath.asinh(nu / x)
    saddles = [ts, -ts, 1j * math.pi - ts, -1j * math.pi - ts, ts + 2j * math.pi, ts - 2j * math.pi]
    for c in (-ax, theta - ax):
        for t0 in saddles:
            r = t0.real
            yield (c, r, t0.imag - c * math.tanh(r), max(1.0, abs(r)))
        yield (c, 0.0, 0.0, 1.0)


def _k_on_contour(nu, x, contour, cfg):
    """(log K, step-halving change, cancellation loss) or None."""
    window = _k_window(nu, x, contour, cfg.quad_cutoff)
    if window is None:
        return None
    lo, hi = window
    p1, s1 = _k_trapezoid(nu, x, contour, lo, hi, cfg.quad_step)
    p2, s2 = _k_trapezoid(nu, x, contour, lo, hi, 0.5 * cfg.quad_step)
    if s2 == 0 or not np.isfinite(s2):
        return None
    change = abs(s1 * math.exp(p1 - p2) - s2) / abs(s2)
    # log of (peak integrand * window length / |integral|)
    loss = -math.log(abs(s2) / (hi - lo))
    return p2 + cmath.log(s2), change, loss


def log_bessel_k(nu, x, config: Optional[SpecFunConfig] = None) -> complex:
    """Complex logarithm of ``K_nu(x)`` for ``Re x > 0``.

    ``K_nu(x) = 1/2 * int exp(-x cosh t + nu t) dt`` over a contour from
    ``-inf`` to ``+inf``. On the real axis the integrand oscillates when
    ``arg x`` is near ``pi/2`` or ``nu`` has a large imaginary part, and
    the sum loses its digits to cancellation. Several contours through the
    saddle points of the exponent are tried; the first one without
    cancellation wins, else the one with the least.
    """
    cfg = config or DEFAULT_CONFIG
    nu, x = complex(nu), complex(x)
    if not x.real > 0:
        raise DomainError(f"K_nu(x) needs Re x > 0, got x = {x}")
    if nu.real < 0 or (nu.real == 0 and nu.imag < 0):
        nu = -nu
    best = None
    for contour in _k_contours(nu, x):
        res = _k_on_contour(nu, x, contour, cfg)
        if res is None:
            continue
        key = (res[1] > 1e-10, res[2])
        if best is None or key < best[0]:
            best = (key, res)
        if res[1] <= 1e-10 and res[2] < _K_GOOD_LOSS:
            break
    if best is None:
        raise AccuracyError(f"K_{nu}({x}): no usable integration contour")
    value, change, _ = best[1]
    if change > 1e-10:
        raise AccuracyError(
            f"K_{nu}({x}): step halving changed the integral by {change:.2e} relative"
        )
    return value


def bessel_k(nu, x, config: Optional[SpecFunConfig] = None) -> complex:
    """Modified Bessel function of the second kind, ``Re x > 0``."""
    return _exp(log_bessel_k(nu, x, config))


def example_reference_plus(lam, z, config: Optional[SpecFunConfig] = None) -> complex:
    """Bounded solution of ``z y'' + 2 lam y' = y`` with ``y(0) = 1``."""
    lam = as_lambda(lam)
    return hyp0f1(2.0 * lam.value, z, config)


def log_example_reference_minus(lam, z, config: Optional[SpecFunConfig] = None) -> complex:
    lam = as_lambda(lam)
    z = complex(z)
    if z.imag == 0 and z.real <= 0:
        raise DomainError("the second solution has a branch cut on (-inf, 0]")
    return (0.5 - lam.value) * cmath.log(z) + log_bessel_k(
        2.0 * lam.value - 1.0, 2.0 * cmath.sqrt(z), config
    )


def example_reference_minus(lam, z, config: Optional[SpecFunConfig] = None) -> complex:
    """``z**(1/2 - lam) * K_{2 lam - 1}(2 sqrt z)``, the solution that is
    ``K_{2 lam - 1}(2)`` with slope ``-K_{2 lam}(2)`` at ``z = 1``."""
    return _exp(log_example_reference_minus(lam, z, config))


def example_reference_minus_derivative(lam, z, config: Optional[SpecFunConfig] = None) -> complex:
    """Derivative of :func:`example_reference_minus`, ``-z**(-lam) K_{2 lam}(2 sqrt z)``."""
    lam = as_lambda(lam)
    z = complex(z)
    if z.imag == 0 and z.real <= 0:
        raise DomainError("the second solution has a branch cut on (-inf, 0]")
    w = -lam.value * cmath.log(z) + log_bessel_k(2.0 * lam.value, 2.0 * cmath.sqrt(z), config)
    return -_exp(w)
