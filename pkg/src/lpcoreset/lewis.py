"""Approximate lq row weights via fixed-point iteration, and samplers built
from them.

The weights are the unique fixed point of

    w_i = (a_i^T (A^T W^(1-2/q) A)^{-1} a_i)^(q/2),

computed here by iterating that map from all-ones. The iteration is a
contraction for q in [1, 4), which is the only regime this module accepts;
larger exponents would need a convex-program solver and are out of scope.
At the fixed point the weights sum to the column count, which makes
normalized weights a sampling distribution with inverse-probability
rescaling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import SampleSet, as_generator, cholesky_with_ridge

WEIGHT_FLOOR = 1e-300  # assigned to all-zero rows, never sampled in practice
DEFAULT_ITERATIONS = 30


@dataclass(frozen=True)
class LewisWeights:
    """Per-row weights together with the exponent they were computed for."""

    weights: np.ndarray
    q: float
    iterations: int = 0

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be 1-d")
        if np.any(w <= 0) or not np.isfinite(w).all():
            raise ValueError("weights must be positive and finite")
        object.__setattr__(self, "weights", w)


def _check_q(q: float):
    if not 1 <= q < 4:
        raise ValueError(f"weight exponent must satisfy 1 <= q < 4, got {q}")


def compute_tau(a, w: LewisWeights) -> np.ndarray:
    """tau_i = a_i^T (A^T W^(1-2/q) A)^{-1} a_i, computed exactly.

    Internally the columns of A are rescaled to unit max-abs before the Gram
    assembly; tau is invariant under invertible column scalings, and the
    rescale keeps high-degree Vandermonde extensions inside double range.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    _check_q(w.q)
    if a.shape[0] != w.weights.shape[0]:
        raise ValueError("weight count must match row count")
    colmax = np.abs(a).max(axis=0)
    colmax[colmax == 0.0] = 1.0
    ahat = a / colmax
    u = w.weights ** (1.0 - 2.0 / w.q)
    gram = _kernels.weighted_gram(ahat, u)
    lower = cholesky_with_ridge(gram)
    return _kernels.tau_from_cholesky(ahat, lower)


def lewis_iterate(a, q: float, w: LewisWeights) -> LewisWeights:
    """One fixed-point step: w_i <- tau_i^(q/2), with a floor on zero rows."""
    _check_q(q)
    tau = compute_tau(a, LewisWeights(w.weights, q, w.iterations))
    new = np.power(tau, q / 2.0)
    dead = new < WEIGHT_FLOOR
    if dead.any():
        if np.any(dead & (np.abs(a).max(axis=1) > 0)):
            warnings.warn("weight underflow on nonzero rows; flooring", RuntimeWarning)
        new = np.where(dead, WEIGHT_FLOOR, new)
    return LewisWeights(new, q, w.iterations + 1)


def approx_lewis_weights(a, q: float, iterations: int = DEFAULT_ITERATIONS) -> LewisWeights:
    """Run the fixed-point iteration from all-ones for a fixed step count.

    Columns that are identically zero are dropped before iterating (they
    cannot affect any quadratic form but would make the Gram singular).
    """
    _check_q(q)
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    a = np.ascontiguousarray(a, dtype=np.float64)
    active = np.abs(a).max(axis=0) > 0.0
    if not active.all():
        a = np.ascontiguousarray(a[:, active])
    w = LewisWeights(np.ones(a.shape[0]), q, 0)
    for _ in range(iterations):
        w = lewis_iterate(a, q, w)
    return w


def fixed_point_residual(a, w: LewisWeights) -> float:
    """max_i |tau_i^(q/2) / w_i - 1|, ignoring floored zero rows."""
    live = np.abs(np.asarray(a, dtype=np.float64)).max(axis=1) > 0.0
    ratio = np.power(compute_tau(a, w), w.q / 2.0)[live] / w.weights[live]
    return float(np.abs(ratio - 1.0).max()) if live.any() else 0.0


def sampling_plan(w: LewisWeights, m: int, p: float):
    """Normalized sampling probabilities and per-index rescaling factors.

    Row i is drawn with probability q_i = w_i / sum(w); a drawn row is
    rescaled by (1 / (m q_i))^(1/p) so that E||S A x||_p^p = ||A x||_p^p
    for the target norm p, exactly, even when the weights do not sum to the
    column count.
    """
    if m < 1:
        raise ValueError("sample count must be >= 1")
    total = float(w.weights.sum())
    if total <= 0:
        raise ValueError("degenerate weights: non-positive total mass")
    probs = w.weights / total
    probs = probs / probs.sum()  # renormalize away float residue
    scales = np.power(1.0 / (m * probs), 1.0 / p)
    return probs, scales


def build_sampler(w: LewisWeights, m: int, p: float, rng=None, d_eff=None) -> SampleSet:
    """Draw m i.i.d. rows from the normalized weight distribution.

    ``d_eff`` is accepted for interface compatibility with unnormalized
    weight-over-dimension sampling and is ignored: the normalized plan is
    unbiased by construction and coincides with it at the fixed point.
    """
    probs, scales = sampling_plan(w, m, p)
    gen = as_generator(rng)
    idx = gen.choice(probs.shape[0], size=m, p=probs)
    return SampleSet(idx.astype(np.int64), scales[idx])


def uniform_sampler(n: int, m: int, p: float, rng=None) -> SampleSet:
    """Baseline: m uniform rows, every scale (n/m)^(1/p)."""
    gen = as_generator(rng)
    idx = gen.integers(0, n, size=m)
    return SampleSet(idx.astype(np.int64), np.full(m, (n / m) ** (1.0 / p)))


def qr_leverage_scores(a) -> np.ndarray:
    """Classical leverage scores via a thin QR; test oracle for q = 2."""
    qmat, _ = np.linalg.qr(np.asarray(a, dtype=np.float64))
    return np.einsum("ij,ij->i", qmat, qmat)
