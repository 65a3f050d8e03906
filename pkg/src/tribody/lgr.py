"""Legendre-Gauss-Radau collocation primitives on [-1, 1].

The N-point Radau set contains the left endpoint -1 plus the N-1 roots of
the Jacobi polynomial P^(0,1)_{N-1}.  Quadrature with the associated
weights integrates polynomials up to degree 2N-2 exactly.  The
differentiation matrix acts on values at the N collocation points plus
the right endpoint +1 (the "support" set) and returns exact derivatives
at the collocation points for polynomials up to degree N.

Everything is cached per N; arrays handed out are fresh copies.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import roots_jacobi

__all__ = [
    "MIN_DEGREE",
    "MAX_DEGREE",
    "points_weights",
    "support_points",
    "differentiation_matrix",
    "barycentric_weights",
    "barycentric_interpolate",
]

MIN_DEGREE = 2
MAX_DEGREE = 12


@lru_cache(maxsize=64)
def _points_weights_cached(n: int):
    if n < 1:
        raise ValueError("need at least one collocation point")
    if n == 1:
        return np.array([-1.0]), np.array([2.0])
    interior, _ = roots_jacobi(n - 1, 0.0, 1.0)
    pts = np.concatenate([[-1.0], np.sort(interior)])
    wts = np.empty(n)
    wts[0] = 2.0 / n**2
    # legendre P_{N-1} evaluated at the interior points
    cN = np.zeros(n)
    cN[n - 1] = 1.0
    pnm1 = npleg.legval(pts[1:], cN)
    wts[1:] = (1.0 - pts[1:]) / (n * pnm1) ** 2
    return pts, wts


def points_weights(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Radau points (including -1) and quadrature weights for degree n."""
    pts, wts = _points_weights_cached(n)
    return pts.copy(), wts.copy()


def support_points(n: int) -> np.ndarray:
    """Collocation points plus the non-collocated right endpoint +1."""
    pts, _ = _points_weights_cached(n)
    return np.concatenate([pts, [1.0]])


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Weights for barycentric Lagrange interpolation on arbitrary nodes."""
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    w = 1.0 / diff.prod(axis=1)
    return w


@lru_cache(maxsize=64)
def _diff_matrix_cached(n: int):
    sup = np.concatenate([_points_weights_cached(n)[0], [1.0]])
    w = barycentric_weights(sup)
    m = n + 1
    d = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                d[i, j] = (w[j] / w[i]) / (sup[i] - sup[j])
        d[i, i] = -np.sum(d[i, [k for k in range(m) if k != i]])
    return d[:n, :]


def differentiation_matrix(n: int) -> np.ndarray:
    """N x (N+1) derivative operator from support values to collocation points."""
    return _diff_matrix_cached(n).copy()


def barycentric_interpolate(
    nodes: np.ndarray, values: np.ndarray, x, weights: np.ndarray | None = None
):
    """Evaluate the interpolating polynomial through (nodes, values) at x.

    values may be 1-D (one series) or 2-D with one row per node.  Queries
    landing exactly on a node return the nodal value.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if weights is None:
        weights = barycentric_weights(nodes)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xs = np.atleast_1d(x)
    diff = xs[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff = np.where(exact, 1.0, diff)
    ratio = weights[None, :] / diff
    denom = ratio.sum(axis=1)
    if values.ndim == 1:
        out = (ratio @ values) / denom
        hit_rows, hit_cols = np.nonzero(exact)
        out[hit_rows] = values[hit_cols]
    else:
        out = (ratio @ values) / denom[:, None]
        hit_rows, hit_cols = np.nonzero(exact)
        out[hit_rows] = values[hit_cols]
    return out[0] if scalar else out
