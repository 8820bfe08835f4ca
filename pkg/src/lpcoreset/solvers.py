"""Solvers for min_x ||Ax - b||_p on small explicit matrices.

Exact normal equations for p = 2, a smoothed and damped IRLS scheme for
general p >= 1, an l-infinity solve via reduction to large p, and a slow
brute-force oracle used by the test suite.

The IRLS scheme minimizes the smoothed objective  sum_i (r_i^2 + delta)^(p/2)
with weights (r_i^2 + delta)^(p/2 - 1), annealing delta downward and damping
each update with a backtracked step size so the objective never increases.
Residual powers are handled in log space, which keeps exponents up to
p = 128 inside double range.
"""

from __future__ import annotations

import math
import warnings
from itertools import combinations

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .core import UnsupportedSizeError, lp_norm, solve_spd

LINF_EXPONENT_CAP = 128


def solve_l2(a, b) -> np.ndarray:
    """Least squares via numpy's SVD-backed lstsq."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.linalg.lstsq(a, b, rcond=None)[0]


def _log_objective(r: np.ndarray, delta: float, p: float) -> float:
    """log sum_i (r_i^2 + delta)^(p/2), stable for large p."""
    return float(logsumexp(0.5 * p * np.log(r * r + delta)))


def _irls_weights(r: np.ndarray, delta: float, p: float) -> np.ndarray:
    """Weights (r^2 + delta)^(p/2 - 1), normalized to max 1.

    The normalization does not change the weighted least-squares solution
    and prevents overflow when p is large.
    """
    lw = (0.5 * p - 1.0) * np.log(r * r + delta)
    return np.exp(lw - lw.max())


def _weighted_lstsq(a, b, w) -> np.ndarray:
    gram = _kernels.weighted_gram(a, w)
    return solve_spd(gram, a.T @ (w * b))


def solve_lp(a, b, p: float, tol: float = 1e-3, max_iter: int = 500, return_info: bool = False):
    """Approximate argmin ||Ax - b||_p to relative tolerance tol.

    Returns x with ||Ax - b||_p <= (1 + tol) * min over x, for p >= 1.
    Stops when the relative decrease of the smoothed objective stays below
    tol^2/8 for 3 consecutive iterations (after the smoothing has annealed
    down) or after max_iter iterations, in which case the best iterate is
    returned with a warning.
    """
    if p == math.inf:
        raise ValueError("use solve_linf for the l-infinity problem")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not 0 < tol < 0.5:
        raise ValueError(f"tol must be in (0, 1/2), got {tol}")
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n = b.shape[0]

    info = {"iterations": 0, "converged": True, "objective_trace": []}
    x = solve_l2(a, b)
    if p == 2:
        return (x, info) if return_info else x

    bnorm2 = float(b @ b)
    if bnorm2 == 0.0:
        return (x, info) if return_info else x

    r = b - a @ x
    delta = bnorm2 / n
    # (p < 2 keeps a much larger floor: the weights blow up as residuals
    # vanish; p >= 2 only needs the anneal to bottom out at float noise)
    delta_floor = 1e-14 * bnorm2 if p < 2 else 1e-30 * bnorm2 / n
    log_obj = _log_objective(r, delta, p)
    info["objective_trace"].append(log_obj)
    small_steps = 0

    for it in range(max_iter):
        info["iterations"] = it + 1
        # anneal the smoothing downward; never below the residual-scaled low
        delta_lo = max(tol * tol * float(r @ r) / n, delta_floor)
        delta = min(delta, max(0.3 * delta, delta_lo))
        log_obj = _log_objective(r, delta, p)

        w = _irls_weights(r, delta, p)
        x_new = _weighted_lstsq(a, b, w)

        step = x_new - x
        accepted = False
        eta = 1.0
        for _ in range(60):
            x_try = x + eta * step
            r_try = b - a @ x_try
            log_try = _log_objective(r_try, delta, p)
            if log_try <= log_obj:
                accepted = True
                break
            eta *= 0.5
        if not accepted:
            break  # no descent available: stationary for this smoothing
        x, r = x_try, r_try
        decrease = -math.expm1(log_try - log_obj)  # 1 - obj_new/obj_old
        log_obj = log_try
        info["objective_trace"].append(log_obj)

        if delta <= 1.01 * delta_lo and decrease < tol * tol / 8.0:
            small_steps += 1
            if small_steps >= 3:
                break
        else:
            small_steps = 0
    else:
        info["converged"] = False
        warnings.warn(
            f"IRLS hit the {max_iter}-iteration cap; returning best iterate",
            RuntimeWarning,
        )
    return (x, info) if return_info else x


def linf_exponent(n: int, eps: float) -> int:
    """p = ceil(3 ln n / eps), capped at 128 so residual powers stay finite."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    p = math.ceil(3.0 * math.log(max(n, 2)) / eps)
    if p > LINF_EXPONENT_CAP:
        warnings.warn(
            f"l-infinity exponent capped at {LINF_EXPONENT_CAP} (wanted {p}); "
            "the approximation factor degrades accordingly",
            RuntimeWarning,
        )
        p = LINF_EXPONENT_CAP
    return max(p, 1)


def solve_linf(a, b, eps: float) -> np.ndarray:
    """Chebyshev (minimax) fit via lp regression at p = ceil(3 ln n / eps).

    With that exponent n^(1/p) <= 1 + eps/2, so the returned x satisfies
    ||Ax - b||_inf <= (1 + O(eps)) * min over x.
    """
    a = np.asarray(a, dtype=np.float64)
    p = linf_exponent(a.shape[0], eps)
    return solve_lp(a, b, p, tol=min(eps / 3.0, 0.45))


# ---------------------------------------------------------------------------
# brute-force oracle (tests only; d <= 3)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def _coordinate_bracket(col: np.ndarray, target: np.ndarray):
    live = col != 0.0
    if not live.any():
        return None
    ratios = target[live] / col[live]
    return float(ratios.min()) - 1e-12, float(ratios.max()) + 1e-12


def _oracle_l1(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact l1 minimizer by enumerating the d-row interpolation vertices."""
    n, d = a.shape
    best_x, best_obj = np.zeros(d), lp_norm(b, 1)
    for rows in combinations(range(n), d):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        obj = lp_norm(a @ x - b, 1)
        if obj < best_obj:
            best_x, best_obj = x, obj
    return best_x


def oracle_solve(a, b, p: float) -> np.ndarray:
    """Global minimizer of ||Ax - b||_p for d <= 3, independent of the IRLS path.

    d = 1 uses golden-section on a bracketed interval; d in {2, 3} uses
    coordinate descent with nested golden-section (the objective is smooth
    and convex for p > 1, so coordinate-wise stationarity is global
    optimality). p = 1 is nonsmooth and is handled exactly by vertex
    enumeration instead.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = a.shape[1]
    if d > 3:
        raise UnsupportedSizeError("oracle supports d <= 3 only")
    if p == 1:
        return _oracle_l1(a, b)

    def objective(x):
        return lp_norm(a @ x - b, p)

    x = np.zeros(d)
    for _ in range(500):
        x_prev = x.copy()
        for j in range(d):
            others = b - a @ x + a[:, j] * x[j]
            bracket = _coordinate_bracket(a[:, j], others)
            if bracket is None:
                continue
            col = a[:, j]

            def f(xj, col=col, others=others):
                return lp_norm(col * xj - others, p)

            x[j] = _golden_section(f, *bracket)
        if np.max(np.abs(x - x_prev)) < 1e-10:
            break
    return x
