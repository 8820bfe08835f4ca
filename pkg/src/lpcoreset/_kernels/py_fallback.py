"""Numpy implementations of the hot kernels.

Used when the compiled extension is unavailable (or when the
LPCORESET_PURE_PYTHON environment variable forces it). Signatures and
semantics match ``lpcoreset._kernels._core`` exactly.
"""

import numpy as np
from scipy.linalg import solve_triangular


def vander_matrix(nodes, degree):
    """Materialize rows [1, t, t^2, ...] via cumulative products."""
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    out = np.empty((nodes.shape[0], degree))
    out[:, 0] = 1.0
    for j in range(1, degree):
        np.multiply(out[:, j - 1], nodes, out=out[:, j])
    return out


def weighted_gram(a, u):
    """G = A^T diag(u) A, returned symmetric."""
    g = (a * u[:, None]).T @ a
    return (g + g.T) * 0.5


def tau_from_cholesky(a, lower):
    """tau_i = || L^{-1} a_i ||^2 for each row a_i, given G = L L^T."""
    y = solve_triangular(lower, a.T, lower=True, check_finite=False)
    return np.einsum("ji,ji->i", y, y)
