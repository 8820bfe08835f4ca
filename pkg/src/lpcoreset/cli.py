"""Command-line interface: one-shot solves and benchmark sweeps.

Matrices are headerless CSV of reals; Vandermonde inputs are one node per
line. Pass ``--p inf`` for minimax fitting. Exit codes: 0 success,
1 numerical failure, 2 bad input or a size guard refusing the instance.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .core import NumericalError, UnsupportedSizeError, VandermondeSpec, lp_norm, materialize
from .experiments import (
    aggregate,
    make_config,
    render_svg,
    run_experiment,
    write_summary_csv,
    write_trials_csv,
)
from .lewis import approx_lewis_weights, build_sampler
from .solvers import solve_linf, solve_lp
from .structured import LowRankPlusSparse, solve_general_lp, solve_lowrank_sparse_lp
from .vander import solve_vandermonde_linf, solve_vandermonde_lp


def _load_vector(path: str) -> np.ndarray:
    v = np.loadtxt(path, delimiter=",", ndmin=1)
    if v.ndim != 1:
        v = v.reshape(-1)
    return np.asarray(v, dtype=np.float64)


def _load_matrix(path: str) -> np.ndarray:
    return np.asarray(np.loadtxt(path, delimiter=",", ndmin=2), dtype=np.float64)


def _parse_p(raw: str) -> float:
    if raw.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    p = float(raw)
    if p < 1:
        raise ValueError(f"p must be >= 1 or 'inf', got {raw}")
    return p


def _sparse_rows_from_dense(s: np.ndarray):
    rows = []
    nnz_max = 0
    for i in range(s.shape[0]):
        cols = np.flatnonzero(s[i])
        rows.append(tuple((int(c), float(s[i, c])) for c in cols))
        nnz_max = max(nnz_max, cols.size)
    return tuple(rows), nnz_max


def _solve_general_small_p(a, b, p, eps, m1, seed, weight_iterations):
    """Direct lq sampling for general matrices with p < 4 (no tensoring needed)."""
    n, d = a.shape
    if m1 is None:
        m1 = min(n, math.ceil(10.0 * d ** max(1.0, p / 2.0) * math.log(max(d, 2))))
    if m1 >= n:
        return solve_lp(a, b, p, tol=min(eps, 0.45)), n
    w = approx_lewis_weights(a, p, weight_iterations)
    s = build_sampler(w, m1, p, rng=np.random.default_rng(seed))
    a_s = a[s.indices] * s.scales[:, None]
    b_s = b[s.indices] * s.scales
    return solve_lp(a_s, b_s, p, tol=min(eps, 0.45)), m1


def _cmd_solve(args) -> int:
    p = _parse_p(args.p)
    b = _load_vector(args.b)
    rounding = not args.no_round

    structure = args.structure
    if structure == "auto":
        if args.vandermonde:
            structure = "vandermonde"
        elif args.left:
            structure = "lowrank+sparse"
        else:
            structure = "general"

    counts = {}
    if structure == "vandermonde":
        if not args.vandermonde or args.degree is None:
            raise ValueError("vandermonde mode needs --vandermonde FILE and --degree")
        spec = VandermondeSpec(_load_vector(args.vandermonde), args.degree)
        a = materialize(spec)
        kw = dict(
            m1=args.m1, m2_per_group=args.m2, rng=args.seed,
            rounding=rounding, wide_groups=args.wide_groups, return_info=True,
        )
        if p == math.inf:
            x_hat, info = solve_vandermonde_linf(spec, b, args.eps, **kw)
        else:
            x_hat, info = solve_vandermonde_lp(spec, b, p, args.eps, **kw)
        counts = {"m1": info["m1"], "stage2": info.get("stage2_total", 0)}
    elif structure == "lowrank+sparse":
        if not (args.left and args.right):
            raise ValueError("lowrank+sparse mode needs --left and --right factor files")
        left = _load_matrix(args.left)
        right = _load_matrix(args.right)
        if args.sparse:
            sparse_rows, s_max = _sparse_rows_from_dense(_load_matrix(args.sparse))
        else:
            sparse_rows, s_max = tuple(() for _ in range(left.shape[0])), 0
        ops = LowRankPlusSparse(left, right, sparse_rows, k=left.shape[1], s=s_max)
        a = ops.dense()
        if p == math.inf:
            raise ValueError("minimax on lowrank+sparse inputs is not supported; use --p <finite>")
        x_hat, info = solve_lowrank_sparse_lp(
            ops, b, p, args.eps, rng=args.seed, m1=args.m1,
            m2_per_group=args.m2, rounding=rounding, return_info=True,
        )
        counts = {"m1": info["m1"], "stage2": info.get("stage2_total", 0)}
    else:
        if not args.matrix:
            raise ValueError("general mode needs --matrix FILE")
        a = _load_matrix(args.matrix)
        if p == math.inf:
            x_hat = solve_linf(a, b, args.eps)
            counts = {"m1": a.shape[0], "stage2": 0}
        elif p >= 4:
            x_hat, info = solve_general_lp(
                a, b, p, args.eps, rng=args.seed, m1=args.m1,
                m2_per_group=args.m2, rounding=rounding, return_info=True,
            )
            counts = {"m1": info["m1"], "stage2": info.get("stage2_total", 0)}
        else:
            x_hat, m1 = _solve_general_small_p(a, b, p, args.eps, args.m1, args.seed, 30)
            counts = {"m1": m1, "stage2": 0}

    achieved = lp_norm(a @ x_hat - b, p)
    if args.out:
        np.savetxt(args.out, x_hat)
        print(f"wrote {x_hat.shape[0]} coefficients to {args.out}")
    else:
        print("x_hat:", " ".join(repr(float(v)) for v in x_hat))
    label = "inf" if p == math.inf else f"{p:g}"
    print(f"achieved l{label} error: {achieved!r}")
    print("sample counts:", " ".join(f"{k}={v}" for k, v in counts.items()))
    return 0


def _parse_grid(raw: str, cast):
    return tuple(cast(tok) for tok in raw.split(",") if tok.strip())


def _cmd_experiment(args) -> int:
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.n is not None:
        overrides["n"] = args.n
    if args.d is not None:
        overrides["d"] = args.d
    if args.noise_sd is not None:
        overrides["noise_sd"] = args.noise_sd
    if args.m is not None:
        overrides["m_grid"] = (args.m,)
    if args.fixed_p is not None:
        overrides["p_grid"] = (args.fixed_p,)
    if args.m_grid is not None:
        overrides["m_grid"] = _parse_grid(args.m_grid, int)
    if args.p_grid is not None:
        overrides["p_grid"] = _parse_grid(args.p_grid, float)
    if args.no_timing:
        overrides["timing"] = False
    cfg = make_config(args.name, scale=args.scale, seed=args.seed, **overrides)

    records = run_experiment(cfg)
    summaries = aggregate(records, cfg.sweep_field)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials_path = out_dir / f"{cfg.experiment}_trials.csv"
    summary_path = out_dir / f"{cfg.experiment}_summary.csv"
    write_trials_csv(trials_path, records, cfg)
    write_summary_csv(summary_path, summaries, cfg)
    print(f"wrote {trials_path} ({len(records)} trials) and {summary_path}")
    if args.svg:
        svg_path = out_dir / f"{cfg.experiment}.svg"
        render_svg(svg_path, summaries, cfg.sweep_field)
        print(f"wrote {svg_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpcoreset")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one regression instance from files")
    ps.add_argument("--matrix", help="headerless CSV matrix (general route)")
    ps.add_argument("--vandermonde", help="node file, one real per line")
    ps.add_argument("--degree", type=int, help="Vandermonde column count")
    ps.add_argument("--left", help="left factor CSV (lowrank+sparse route)")
    ps.add_argument("--right", help="right factor CSV (lowrank+sparse route)")
    ps.add_argument("--sparse", help="sparse part as dense CSV (lowrank+sparse route)")
    ps.add_argument("--b", required=True, help="response vector file")
    ps.add_argument("--p", required=True, help="norm exponent >= 1, or 'inf'")
    ps.add_argument("--eps", type=float, default=0.25, help="accuracy target (default 0.25)")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--m1", type=int, help="stage-1 sample size override")
    ps.add_argument("--m2", type=int, help="per-group stage-2 sample size override")
    ps.add_argument("--out", help="write the coefficient vector here")
    ps.add_argument("--no-round", action="store_true", help="skip the rounding/grouping stage")
    ps.add_argument("--wide-groups", action="store_true",
                    help="use the grid-width per-group extension (A/B validation)")
    ps.add_argument("--structure", choices=("auto", "vandermonde", "general", "lowrank+sparse"),
                    default="auto")
    ps.set_defaults(func=_cmd_solve)

    pe = sub.add_parser("experiment", help="run a benchmark sweep and emit CSVs")
    pe.add_argument("name", choices=("vander-p", "vander-m", "unstructured"))
    pe.add_argument("--scale", choices=("desk", "paper"), default="desk")
    pe.add_argument("--trials", type=int)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--out", default=".", help="output directory (default: cwd)")
    pe.add_argument("--svg", action="store_true", help="also render a log-scale SVG plot")
    pe.add_argument("--no-timing", action="store_true",
                    help="write zero wall times for byte-identical reruns")
    pe.add_argument("--n", type=int, help="row count override")
    pe.add_argument("--d", type=int, help="column count override")
    pe.add_argument("--noise-sd", type=float, help="additive noise level override")
    pe.add_argument("--m", type=int, help="fixed sample count override (p sweeps)")
    pe.add_argument("--p", dest="fixed_p", type=float, help="fixed norm override (m sweeps)")
    pe.add_argument("--m-grid", help="comma-separated m grid override")
    pe.add_argument("--p-grid", help="comma-separated p grid override")
    pe.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, UnsupportedSizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
