"""Chebyshev--Lobatto grids on [-1, 1].

Nodes are ordered increasingly, ``x_j = -cos(pi j / (N - 1))``, so that the
first node is the start of whatever piece of path the grid is mapped onto.
All matrices are cached per node count.
"""
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import legendre


@lru_cache(maxsize=None)
def nodes(n):
    """Chebyshev--Lobatto points, increasing, endpoints included."""
    if n < 2:
        raise ValueError("need at least two Lobatto nodes")
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    # exact symmetry and endpoints
    x[0], x[-1] = -1.0, 1.0
    if n % 2:
        x[n // 2] = 0.0
    x.setflags(write=False)
    return x


@lru_cache(maxsize=None)
def barycentric_weights(n):
    w = (-1.0) ** np.arange(n)
    w[0] *= 0.5
    w[-1] *= 0.5
    w.setflags(write=False)
    return w


def interpolation_matrix(n, targets):
    """Matrix ``P`` with ``P @ f(nodes) == p(targets)``, ``p`` the interpolant.

    Uses the second (true) barycentric formula; a target coinciding with a
    node picks that node's value exactly.
    """
    x = nodes(n)
    w = barycentric_weights(n)
    t = np.asarray(targets, dtype=float).reshape(-1)
    diff = t[:, None] - x[None, :]
    exact = diff == 0.0
    hit = exact.any(axis=1)
    diff[exact] = 1.0
    P = w[None, :] / diff
    P /= P.sum(axis=1, keepdims=True)
    if hit.any():
        P[hit] = exact[hit].astype(float)
    return P


@lru_cache(maxsize=None)
def differentiation_matrix(n):
    """Spectral derivative d/dx on the Lobatto grid (negative-sum diagonal)."""
    x = nodes(n)
    w = barycentric_weights(n)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    D = (w[None, :] / w[:, None]) / dx
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    D.setflags(write=False)
    return D


@lru_cache(maxsize=None)
def values_to_coefficients(n):
    """Matrix taking nodal values to Chebyshev coefficients (DCT-I)."""
    m = n - 1
    j = np.arange(n)
    # node j sits at cos(pi (m - j) / m)
    T = np.cos(np.pi * np.outer(j, m - j) / m)
    T[:, 0] *= 0.5
    T[:, -1] *= 0.5
    T *= 2.0 / m
    T[0] *= 0.5
    T[-1] *= 0.5
    T.setflags(write=False)
    return T


def coefficients(values):
    """Chebyshev coefficients of the interpolant through nodal ``values``.

    ``values`` may be stacked along the leading axes; the last axis holds
    the N nodal samples.
    """
    values = np.asarray(values)
    return values @ values_to_coefficients(values.shape[-1]).T


def chop(values, tol=1e-15):
    """Nodal values with the trailing Chebyshev coefficients below
    ``tol * max |c|`` set to zero, row by row."""
    values = np.asarray(values)
    c = coefficients(values)
    scale = np.max(np.abs(c), axis=-1, keepdims=True)
    small = np.abs(c) <= tol * scale
    # only the trailing run of small coefficients is dropped
    keep = np.flip(np.cumsum(np.flip(~small, axis=-1), axis=-1), axis=-1) > 0
    c = np.where(keep, c, 0.0)
    return c @ C.chebvander(nodes(values.shape[-1]), values.shape[-1] - 1).T


@lru_cache(maxsize=None)
def cumulative_matrix(n):
    """Matrix ``Q`` with ``(Q f)_i = integral of the interpolant from -1 to x_i``."""
    x = nodes(n)
    integ = np.zeros((n + 1, n))
    eye = np.eye(n)
    for k in range(n):
        integ[:, k] = C.chebint(eye[k], lbnd=-1.0)
    Q = C.chebvander(x, n) @ integ @ values_to_coefficients(n)
    Q[0] = 0.0
    Q.setflags(write=False)
    return Q


@lru_cache(maxsize=None)
def clenshaw_curtis_weights(n):
    """Quadrature weights on [-1, 1]; they sum to 2."""
    w = np.array(cumulative_matrix(n)[-1])
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def gauss_legendre(m):
    """Gauss--Legendre rule on [0, 1] as (points, weights)."""
    x, w = legendre.leggauss(m)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def tail_ratio(values, width=8):
    """Size of the trailing Chebyshev coefficients relative to the largest one.

    Used to decide whether a grid resolves a function; stacked rows are
    measured separately and the worst row is returned: a value near 1e-16
    means converged, anything above ~1e-13 calls for refinement.
    """
    c = np.abs(coefficients(values))
    c = c.reshape(-1, c.shape[-1])
    width = min(width, max(1, c.shape[-1] // 4))
    # each row (piece of path) is judged against its own scale
    scale = c.max(axis=1)
    live = scale > 0
    if not live.any():
        return 0.0
    return float((c[live, -width:].max(axis=1) / scale[live]).max())
