"""Dense linear-algebra primitives shared by every pipeline stage.

Matrices are row-major float64 numpy arrays, vectors are 1-d arrays. The
module adds the few pieces numpy does not give us directly: an implicit
Vandermonde representation, overflow-safe lp norms, row sampling with
rescaling, and an SPD solve with a ridge fallback for the ill-conditioned
Gram matrices that extended Vandermonde blocks produce.

All container types are frozen dataclasses and every function is pure, so
everything here is safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from . import _kernels


class NumericalError(RuntimeError):
    """A factorization or iteration failed beyond the built-in rescue paths."""


class UnsupportedSizeError(ValueError):
    """The input exceeds a desk-scale guard; refusing beats a silent blowup."""


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed / SeedSequence / Generator / None to a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def as_seed_sequence(rng) -> np.random.SeedSequence:
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        raise TypeError("pipelines need an int seed or SeedSequence, not a Generator")
    return np.random.SeedSequence(rng)


def as_matrix(a) -> np.ndarray:
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ValueError("matrix entries must be finite")
    return m

def as_vector(v) -> np.ndarray:
    w = np.ascontiguousarray(v, dtype=np.float64)
    if w.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got ndim={w.ndim}")
    if not np.isfinite(w).all():
        raise ValueError("vector entries must be finite")
    return w


@dataclass(frozen=True)
class VandermondeSpec:
    """Implicit n x degree Vandermonde matrix stored as its node values.

    Row i materializes to [1, t_i, t_i^2, ..., t_i^(degree-1)].
    """

    nodes: np.ndarray
    degree: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", as_vector(self.nodes))
        if self.degree < 1:
            raise ValueError("degree must be >= 1")

    @property
    def n_rows(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class SampleSet:
    """Sampled row indices with rescaling factors.

    Realizes a sampling-and-rescaling matrix: row j of the sampled operand
    is scales[j] * A[indices[j]]. Repeated indices are allowed.
    """

    indices: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        sc = as_vector(self.scales)
        if idx.ndim != 1 or idx.shape[0] != sc.shape[0]:
            raise ValueError("indices and scales must be 1-d and of equal length")
        if idx.size and idx.min() < 0:
            raise ValueError("indices must be non-negative")
        if np.any(sc <= 0):
            raise ValueError("scales must be positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scales", sc)

    @property
    def size(self) -> int:
        return self.indices.shape[0]


def take_all_sample(n: int) -> SampleSet:
    """The identity embedding: every row once, scale 1."""
    return SampleSet(np.arange(n, dtype=np.int64), np.ones(n))


def materialize(spec: VandermondeSpec) -> np.ndarray:
    """Materialize the Vandermonde matrix; entry (i, j) is nodes[i]**j."""
    return _kernels.vander_matrix(spec.nodes, spec.degree)


def lp_norm(v, p) -> float:
    """(sum |v_i|^p)^(1/p); max |v_i| for p = inf. Overflow-safe for large p."""
    if p != math.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return 0.0
    amax = float(np.abs(v).max())
    if p == math.inf or amax == 0.0:
        return amax
    # factor out the max so |v_i/amax|^p stays in range for p up to 128
    return amax * float(np.power(np.abs(v) / amax, p).sum() ** (1.0 / p))


def apply_sample(s: SampleSet, a, b):
    """Apply a sampling-and-rescaling matrix to (A, b).

    ``a`` may be a dense matrix or a VandermondeSpec; rows are gathered and
    scaled so that row j of the output is scales[j] * A[indices[j]].
    """
    if isinstance(a, VandermondeSpec):
        n = a.n_rows
    else:
        a = np.asarray(a, dtype=np.float64)
        n = a.shape[0]
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != n:
        raise ValueError("A and b row counts differ")
    if s.size and int(s.indices.max()) >= n:
        raise ValueError("sample index out of range")
    if isinstance(a, VandermondeSpec):
        rows = _kernels.vander_matrix(a.nodes[s.indices], a.degree)
    else:
        rows = a[s.indices]
    return rows * s.scales[:, None], b[s.indices] * s.scales


def solve_spd(g, rhs) -> np.ndarray:
    """Solve G z = rhs for symmetric positive definite G.

    Falls back to a ridge-regularized solve G + lam*I with
    lam = 1e-12 * trace(G)/d if the Cholesky factorization fails; raises
    NumericalError if G is indefinite beyond that rescue.
    """
    g = np.asarray(g, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("G must be square")
    if g.shape[0] != rhs.shape[0]:
        raise ValueError("G and rhs dimensions differ")
    lower = cholesky_with_ridge(g)
    return cho_solve((lower, True), rhs, check_finite=False)


def cholesky_with_ridge(g: np.ndarray) -> np.ndarray:
    """Cholesky factor of G, retrying with lam = 1e-12 tr(G)/d (then 100x)."""
    d = g.shape[0]
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        pass
    base = 1e-12 * max(float(np.trace(g)), 0.0) / max(d, 1)
    if base <= 0.0 or not math.isfinite(base):
        raise NumericalError("Gram matrix is not positive definite and has no usable trace")
    for lam in (base, 100.0 * base):
        try:
            return np.linalg.cholesky(g + lam * np.eye(d))
        except np.linalg.LinAlgError:
            continue
    raise NumericalError("matrix indefinite beyond ridge rescue")
