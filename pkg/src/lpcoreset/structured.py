"""Sampling pipelines for low-rank + sparse and fully general matrices.

Both reuse the sample -> round -> group -> solve skeleton of the
Vandermonde pipeline; only the row linearization changes.

General matrices: each row is tensored with itself 2^r times, where
r = floor(log2 p) - 1, so the weight exponent q = p / 2^r lands in [2, 4)
and the fixed-point weight iteration still applies. The extended width is
d^(2^r), so this route is guarded by an explicit column cap.

Low-rank + sparse matrices A = L R + S: each row is a combination of the k
shared basis rows of R plus at most s coordinate vectors, so its 2^r-fold
power expands over multisets of those k + s symbols. Columns are indexed
by (multiset of basis symbols with multiplicities), entries are multinomial
coefficients times products of the row's combination coefficients. Group
shifts are handled by appending the group constant as one extra basis
symbol before powering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .core import SampleSet, UnsupportedSizeError, as_seed_sequence, take_all_sample
from .lewis import DEFAULT_ITERATIONS, approx_lewis_weights, build_sampler
from .rounding import partition_groups, round_trunc
from .solvers import solve_lp
from .vander import CONSTANT_FACTOR_TOL, _stage_sample, default_m1, default_m2

DEFAULT_COLUMN_CAP = 4096


@dataclass(frozen=True)
class TensorPlan:
    """Tensor plan for general matrices: 2^(r+1) <= p < 2^(r+2), q in [2, 4)."""

    r: int
    q: float
    width: int

    def __post_init__(self):
        if not 2 <= self.q < 4:
            raise ValueError(f"tensor plan exponent out of range: q={self.q}")


def plan_tensor(d: int, p: float, cap: int = DEFAULT_COLUMN_CAP) -> TensorPlan:
    if p < 4:
        raise ValueError(f"the tensor route needs p >= 4, got {p}")
    r = int(math.floor(math.log2(p))) - 1
    q = p / float(2**r)
    width = d ** (2**r)
    if width > cap:
        raise UnsupportedSizeError(
            f"tensor extension needs {width} columns (> cap {cap}); "
            "reduce d or p, or raise the cap explicitly"
        )
    return TensorPlan(r=r, q=q, width=width)


def tensor_power_rows(a: np.ndarray, r: int) -> np.ndarray:
    """Row-wise 2^r-fold self tensor product, flattened lexicographically."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    n = m.shape[0]
    for _ in range(r):
        m = np.einsum("ij,ik->ijk", m, m).reshape(n, -1)
    return m


def extend_tensor(a, plan: TensorPlan) -> np.ndarray:
    """Rows a_i^(tensor 2^r); satisfies <a_i, x>^(2^r) = <m_i, x^(tensor 2^r)>."""
    a = np.asarray(a, dtype=np.float64)
    if a.shape[1] ** (2**plan.r) != plan.width:
        raise ValueError("plan width does not match the input column count")
    return tensor_power_rows(a, plan.r)


@dataclass(frozen=True)
class LowRankPlusSparse:
    """A = left @ right + sparse, with sparse rows given as (column, value) lists.

    ``left`` is n x k, ``right`` is k x d (its rows are the shared basis),
    and ``sparse_rows[i]`` holds at most ``s`` (column, value) pairs.
    """

    left: np.ndarray
    right: np.ndarray
    sparse_rows: tuple
    k: int
    s: int

    def __post_init__(self):
        left = np.ascontiguousarray(self.left, dtype=np.float64)
        right = np.ascontiguousarray(self.right, dtype=np.float64)
        if left.ndim != 2 or right.ndim != 2 or left.shape[1] != right.shape[0]:
            raise ValueError("left (n x k) and right (k x d) shapes are inconsistent")
        if self.k != left.shape[1]:
            raise ValueError("k must equal the inner factorization dimension")
        rows = tuple(tuple((int(c), float(v)) for c, v in row) for row in self.sparse_rows)
        if len(rows) != left.shape[0]:
            raise ValueError("sparse_rows must have one entry list per row")
        d = right.shape[1]
        for row in rows:
            if len(row) > self.s:
                raise ValueError(f"a sparse row has more than s={self.s} entries")
            for c, _ in row:
                if not 0 <= c < d:
                    raise ValueError("sparse column index out of range")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "sparse_rows", rows)

    @property
    def n_rows(self) -> int:
        return self.left.shape[0]

    @property
    def n_cols(self) -> int:
        return self.right.shape[1]

    def dense(self) -> np.ndarray:
        a = self.left @ self.right
        for i, row in enumerate(self.sparse_rows):
            for c, v in row:
                a[i, c] += v
        return a


def _check_lowrank_guards(ops: LowRankPlusSparse, r: int, cap: int):
    if ops.k + ops.s > 6:
        raise UnsupportedSizeError(f"k + s = {ops.k + ops.s} exceeds the guard of 6")
    if 2**r > 8:
        raise UnsupportedSizeError(f"2^r = {2**r} exceeds the guard of 8")
    bound = math.comb(ops.n_cols, min(ops.s, ops.n_cols)) * (ops.k + ops.s + 1) ** (2**r)
    if bound > cap:
        raise UnsupportedSizeError(
            f"low-rank+sparse extension bound {bound} exceeds cap {cap}"
        )


def _row_symbols(ops: LowRankPlusSparse, i: int, const_coeff: float | None):
    """(symbol, coefficient) pairs decomposing row i over the shared basis.

    Symbols: ('v', j) for basis row j of ``right``, ('e', c) for coordinate
    c, and ('k', 0) for the appended constant used by group shifts.
    """
    syms = [(("v", j), float(ops.left[i, j])) for j in range(ops.k)]
    syms += [(("e", c), v) for c, v in ops.sparse_rows[i]]
    if const_coeff is not None:
        syms.append((("k", 0), const_coeff))
    return syms


def _multiset_key(combo):
    counts = {}
    for sym in combo:
        counts[sym] = counts.get(sym, 0) + 1
    return tuple(sorted(counts.items()))


def _lowrank_sparse_matrix(ops: LowRankPlusSparse, r: int, const_coeffs=None):
    """Extension matrix plus its ordered column keys.

    ``const_coeffs`` optionally appends a per-row constant symbol (used for
    group shifts, where it is the same value for every row of the group).
    """
    two_r = 2**r
    fact = math.factorial(two_r)
    row_entries = []
    all_keys = set()
    for i in range(ops.n_rows):
        cc = None if const_coeffs is None else float(const_coeffs[i])
        syms = _row_symbols(ops, i, cc)
        entries = {}
        for combo in combinations_with_replacement(range(len(syms)), two_r):
            coeff = 1.0
            counts = {}
            for si in combo:
                sym, c = syms[si]
                coeff *= c
                counts[sym] = counts.get(sym, 0) + 1
            if coeff == 0.0:
                continue
            mult = fact
            for cnt in counts.values():
                mult //= math.factorial(cnt)
            key = tuple(sorted(counts.items()))
            entries[key] = entries.get(key, 0.0) + mult * coeff
        row_entries.append(entries)
        all_keys.update(entries)
    keys = sorted(all_keys)
    col_of = {k: j for j, k in enumerate(keys)}
    m = np.zeros((ops.n_rows, max(len(keys), 1)))
    for i, entries in enumerate(row_entries):
        for key, val in entries.items():
            m[i, col_of[key]] = val
    return m, keys


def extend_lowrank_sparse(ops: LowRankPlusSparse, r: int, cap: int = DEFAULT_COLUMN_CAP) -> np.ndarray:
    """Rows of the multiset-indexed extension; <a_i,x>^(2^r) = <m_i, y(x)>.

    The matching y(x) is produced by :func:`lowrank_sparse_feature_vector`.
    """
    _check_lowrank_guards(ops, r, cap)
    m, _ = _lowrank_sparse_matrix(ops, r)
    return m


def lowrank_sparse_feature_vector(ops: LowRankPlusSparse, r: int, x, cap: int = DEFAULT_COLUMN_CAP) -> np.ndarray:
    """y(x) aligned with the columns of extend_lowrank_sparse(ops, r)."""
    _check_lowrank_guards(ops, r, cap)
    _, keys = _lowrank_sparse_matrix(ops, r)
    return _feature_values(ops, keys, np.asarray(x, dtype=np.float64))


def _feature_values(ops: LowRankPlusSparse, keys, x: np.ndarray) -> np.ndarray:
    vx = ops.right @ x
    out = np.empty(len(keys))
    for j, key in enumerate(keys):
        val = 1.0
        for (kind, idx), cnt in key:
            if kind == "v":
                val *= vx[idx] ** cnt
            elif kind == "e":
                val *= x[idx] ** cnt
            # ('k', 0): the constant coordinate contributes 1
        out[j] = val
    return out


def _subset(ops: LowRankPlusSparse, rows: np.ndarray) -> LowRankPlusSparse:
    return LowRankPlusSparse(
        left=ops.left[rows],
        right=ops.right,
        sparse_rows=tuple(ops.sparse_rows[int(i)] for i in rows),
        k=ops.k,
        s=ops.s,
    )


def solve_lowrank_sparse_lp(
    ops: LowRankPlusSparse,
    b,
    p: float,
    eps: float,
    rng=None,
    *,
    m1: int | None = None,
    m2_per_group: int | None = None,
    rounding: bool = True,
    cap: int = DEFAULT_COLUMN_CAP,
    weight_iterations: int = DEFAULT_ITERATIONS,
    solver_tol: float | None = None,
    return_info: bool = False,
):
    """Sampled lp regression on A = left @ right + sparse.

    Same skeleton and contract as solve_vandermonde_lp; per-group shifts
    append the group constant as one extra basis symbol before powering.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    b = np.asarray(b, dtype=np.float64)
    n = ops.n_rows
    if b.shape[0] != n:
        raise ValueError("b length must match row count")
    r = int(math.floor(math.log2(p)))
    q = p / float(2**r)
    _check_lowrank_guards(ops, r, cap)
    final_tol = min(eps, CONSTANT_FACTOR_TOL) if solver_tol is None else solver_tol
    ss = as_seed_sequence(rng)
    stage1_seed, _ = ss.spawn(2)

    ext = extend_lowrank_sparse(ops, r, cap)
    a = ops.dense()
    if m1 is None:
        m1 = default_m1(ext.shape[1])
    info = {"r": r, "q": q, "width": ext.shape[1], "m1": int(min(m1, n))}

    s1 = _stage_sample(ext, q, m1, p, stage1_seed, weight_iterations)
    a1 = a[s1.indices] * s1.scales[:, None]
    b1 = b[s1.indices] * s1.scales

    if not rounding:
        x_hat = solve_lp(a1, b1, p, tol=final_tol)
        return (x_hat, info) if return_info else x_hat

    x_tilde = solve_lp(a1, b1, p, tol=CONSTANT_FACTOR_TOL)
    b_res = b - a @ x_tilde
    part = partition_groups(round_trunc(b_res, eps))

    group_seeds = ss.spawn(part.n_groups)
    idx_parts, scale_parts = [], []
    for gi, rows in enumerate(part.groups):
        g = rows.shape[0]
        if g == 0:
            continue
        t_k = float(part.values[gi])
        sub = _subset(ops, rows)
        block, _ = _lowrank_sparse_matrix(sub, r, const_coeffs=np.full(g, -t_k))
        if block.shape[1] > cap:
            raise UnsupportedSizeError(
                f"group extension width {block.shape[1]} exceeds cap {cap}"
            )
        m2 = default_m2(block.shape[1], eps) if m2_per_group is None else m2_per_group
        if m2 >= g:
            idx_parts.append(rows)
            scale_parts.append(np.ones(g))
            continue
        w = approx_lewis_weights(block, q, weight_iterations)
        s = build_sampler(w, m2, p, rng=np.random.default_rng(group_seeds[gi]))
        idx_parts.append(rows[s.indices])
        scale_parts.append(s.scales)

    stacked = SampleSet(np.concatenate(idx_parts), np.concatenate(scale_parts))
    a2 = a[stacked.indices] * stacked.scales[:, None]
    b2 = b_res[stacked.indices] * stacked.scales
    x_res = solve_lp(a2, b2, p, tol=final_tol)
    x_hat = x_res + x_tilde
    info.update({"n_groups": part.n_groups, "stage2_total": int(stacked.size)})
    return (x_hat, info) if return_info else x_hat


def general_stage1_count(d: int, p: float, n: int) -> int:
    """min(n, ceil(10 d^(p/2) log d)): the tensor route's stage-1 sample size."""
    raw = 10.0 * float(d) ** (p / 2.0) * math.log(max(d, 2))
    if raw >= n:
        return n
    return math.ceil(raw)


def solve_general_lp(
    a,
    b,
    p: float,
    eps: float,
    rng=None,
    *,
    m1: int | None = None,
    m2_per_group: int | None = None,
    rounding: bool = True,
    cap: int = DEFAULT_COLUMN_CAP,
    weight_iterations: int = DEFAULT_ITERATIONS,
    solver_tol: float | None = None,
    return_info: bool = False,
):
    """Sampled lp regression for arbitrary matrices, p >= 4.

    Tensoring each row 2^r times (r = floor(log2 p) - 1) keeps the weight
    exponent q = p/2^r inside [2, 4), so no convex programming is needed no
    matter how large p is. When the default stage-1 count reaches n the
    pipeline degrades gracefully to the exact solve.
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n, d = a.shape
    if b.shape[0] != n:
        raise ValueError("b length must match row count")
    plan = plan_tensor(d, p, cap)
    final_tol = min(eps, CONSTANT_FACTOR_TOL) if solver_tol is None else solver_tol
    ss = as_seed_sequence(rng)
    stage1_seed, _ = ss.spawn(2)

    ext = tensor_power_rows(a, plan.r)
    if m1 is None:
        m1 = general_stage1_count(d, p, n)
    info = {"plan": plan, "m1": int(min(m1, n))}

    s1 = _stage_sample(ext, plan.q, m1, p, stage1_seed, weight_iterations)
    a1 = a[s1.indices] * s1.scales[:, None]
    b1 = b[s1.indices] * s1.scales

    if not rounding:
        x_hat = solve_lp(a1, b1, p, tol=final_tol)
        return (x_hat, info) if return_info else x_hat

    x_tilde = solve_lp(a1, b1, p, tol=CONSTANT_FACTOR_TOL)
    b_res = b - a @ x_tilde
    part = partition_groups(round_trunc(b_res, eps))

    group_width = (d + 1) ** (2**plan.r)
    if group_width > cap:
        raise UnsupportedSizeError(
            f"group tensor extension needs {group_width} columns (> cap {cap})"
        )
    if m2_per_group is None:
        m2_per_group = math.ceil(
            10.0 * float(d + 1) ** (p / 2.0) * math.log(d + 1) / (eps * eps)
        )

    group_seeds = ss.spawn(part.n_groups)
    idx_parts, scale_parts = [], []
    for gi, rows in enumerate(part.groups):
        g = rows.shape[0]
        if g == 0:
            continue
        if m2_per_group >= g:
            idx_parts.append(rows)
            scale_parts.append(np.ones(g))
            continue
        t_k = float(part.values[gi])
        shifted = np.concatenate([a[rows], np.full((g, 1), -t_k)], axis=1)
        block = tensor_power_rows(shifted, plan.r)
        w = approx_lewis_weights(block, plan.q, weight_iterations)
        s = build_sampler(w, m2_per_group, p, rng=np.random.default_rng(group_seeds[gi]))
        idx_parts.append(rows[s.indices])
        scale_parts.append(s.scales)

    stacked = SampleSet(np.concatenate(idx_parts), np.concatenate(scale_parts))
    a2 = a[stacked.indices] * stacked.scales[:, None]
    b2 = b_res[stacked.indices] * stacked.scales
    x_res = solve_lp(a2, b2, p, tol=final_tol)
    x_hat = x_res + x_tilde
    info.update({"n_groups": part.n_groups, "stage2_total": int(stacked.size)})
    return (x_hat, info) if return_info else x_hat
