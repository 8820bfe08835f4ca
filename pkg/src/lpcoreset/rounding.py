"""Residual rounding and row grouping.

``round_trunc`` snaps every entry to the nearest power of (1 + eps) from
below and zeroes entries that are negligibly small next to the largest one
(at most max/n^5 in magnitude). The result has O(log n / eps) distinct
magnitudes, so rows can be grouped by exact value for per-group sampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# absorbs float noise in log-ratio exponents so grid points round to themselves
_GRID_NUDGE = 1e-12


@dataclass(frozen=True)
class GroupPartition:
    """Rows of [n] grouped by their shared rounded value.

    Groups are ordered by decreasing |value| with the zero group last; the
    ordering is fixed so downstream sampling is reproducible.
    """

    values: np.ndarray
    groups: list

    def __post_init__(self):
        if len(self.values) != len(self.groups):
            raise ValueError("values and groups must have matching lengths")

    @property
    def n_groups(self) -> int:
        return len(self.groups)


def round_trunc(b, eps: float) -> np.ndarray:
    """Round entries down to powers of (1 + eps); zero the negligible ones.

    Nonzero entries map to sign(b_i) * (1+eps)^floor(log_{1+eps}|b_i|), so
    kept entries satisfy |b_i - x_i| <= eps * |b_i|. Entries whose rounded
    magnitude is at most max|b| / n^5 are set to zero (strictly below, in
    the degenerate n = 1 case where the threshold equals the maximum).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    out = np.zeros_like(b)
    nz = b != 0.0
    if not nz.any():
        return out
    log_base = np.log1p(eps)
    expo = np.floor(np.log(np.abs(b[nz])) / log_base + _GRID_NUDGE)
    out[nz] = np.sign(b[nz]) * np.power(1.0 + eps, expo)
    big = float(np.abs(b).max())
    threshold = big / float(n) ** 5
    if n == 1:
        out[np.abs(out) < threshold] = 0.0
    else:
        out[np.abs(out) <= threshold] = 0.0
    return out


def partition_groups(b2) -> GroupPartition:
    """Group row indices by exact value of a rounded vector.

    Ordering: decreasing |value|, positive before negative on ties, zero
    group last.
    """
    b2 = np.asarray(b2, dtype=np.float64)
    values = np.unique(b2)
    order = sorted(values, key=lambda v: (-abs(v), -np.sign(v)))
    vals, groups = [], []
    for v in order:
        idx = np.flatnonzero(b2 == v)
        vals.append(v)
        groups.append(idx)
    return GroupPartition(np.asarray(vals), groups)
