"""Row-sampling coresets for lp and Chebyshev regression on structured matrices.

Sampling by iteratively-computed row weights on extended (linearized)
matrices keeps the sample count polynomial in p for Vandermonde,
low-rank-plus-sparse, and general inputs, which in turn makes subsampled
l-infinity regression practical.
"""

from ._kernels import BACKEND, HAVE_COMPILED
from .core import (
    NumericalError,
    SampleSet,
    UnsupportedSizeError,
    VandermondeSpec,
    apply_sample,
    lp_norm,
    materialize,
    solve_spd,
)
from .lewis import (
    LewisWeights,
    approx_lewis_weights,
    build_sampler,
    compute_tau,
    fixed_point_residual,
    lewis_iterate,
    sampling_plan,
    uniform_sampler,
)
from .rounding import GroupPartition, partition_groups, round_trunc
from .solvers import oracle_solve, solve_l2, solve_linf, solve_lp
from .structured import (
    LowRankPlusSparse,
    TensorPlan,
    extend_lowrank_sparse,
    extend_tensor,
    plan_tensor,
    solve_general_lp,
    solve_lowrank_sparse_lp,
)
from .vander import (
    ExtensionPlan,
    extend_vandermonde,
    plan_extension,
    poly_power_coeffs,
    solve_vandermonde_linf,
    solve_vandermonde_lp,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "NumericalError",
    "SampleSet",
    "UnsupportedSizeError",
    "VandermondeSpec",
    "apply_sample",
    "lp_norm",
    "materialize",
    "solve_spd",
    "LewisWeights",
    "approx_lewis_weights",
    "build_sampler",
    "compute_tau",
    "fixed_point_residual",
    "lewis_iterate",
    "sampling_plan",
    "uniform_sampler",
    "GroupPartition",
    "partition_groups",
    "round_trunc",
    "oracle_solve",
    "solve_l2",
    "solve_linf",
    "solve_lp",
    "LowRankPlusSparse",
    "TensorPlan",
    "extend_lowrank_sparse",
    "extend_tensor",
    "plan_tensor",
    "solve_general_lp",
    "solve_lowrank_sparse_lp",
    "ExtensionPlan",
    "extend_vandermonde",
    "plan_extension",
    "poly_power_coeffs",
    "solve_vandermonde_linf",
    "solve_vandermonde_lp",
    "__version__",
]
