"""Synthetic benchmark protocols: data generators, sweeps, aggregation, CSV.

Two instance families stress the samplers in complementary ways. The
polynomial family draws Gaussian nodes and responses dominated by noise
except on a thin high-magnitude tail, so only a handful of rows carry
signal. The block family hides a tall informative block (100 rows, 6 wide)
inside a much larger uninformative one; uniform sampling whiffs on it until
m approaches n/100 while weight-proportional sampling finds it immediately.

Every trial derives its own seed from (experiment seed, grid index, trial
index), so results are independent of execution order and rerunning a
sweep reproduces the trial CSV exactly (modulo the measured wall times;
pass timing=False to zero them out and get byte-identical files).
"""

from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import VandermondeSpec, lp_norm, materialize
from .lewis import approx_lewis_weights, build_sampler, uniform_sampler
from .solvers import solve_lp
from .structured import plan_tensor, tensor_power_rows
from .vander import solve_vandermonde_lp

EXPERIMENTS = ("vander-p", "vander-m", "unstructured")
THREADS_ENV = "LPCORESET_THREADS"


@dataclass(frozen=True)
class TrialRecord:
    experiment: str
    method: str  # lewis | uniform
    p: float
    m: int
    trial: int
    seed: int
    eps_empirical: float
    wall_time_s: float


@dataclass(frozen=True)
class QuantileSummary:
    experiment: str
    method: str
    key: float  # the swept grid value (p or m)
    median: float
    q25: float
    q75: float
    count: int


@dataclass(frozen=True)
class SweepConfig:
    experiment: str
    scale: str
    n: int
    d: int
    p_grid: tuple
    m_grid: tuple
    trials: int
    seed: int
    noise_sd: float | None = None
    node_clip: float | None = None
    solver_tol: float = 1e-6
    weight_iterations: int = 30
    timing: bool = True

    @property
    def sweep_field(self) -> str:
        return "p" if self.experiment == "vander-p" else "m"

    @property
    def grid(self) -> tuple:
        return self.p_grid if self.sweep_field == "p" else self.m_grid

    def as_header_items(self):
        items = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            items.append(f"{f.name}={v}")
        return items


_PRESETS = {
    ("vander-p", "desk"): dict(
        n=5000, d=10, noise_sd=100.0, node_clip=6.0,
        p_grid=(2.0, 4.0, 8.0, 16.0), m_grid=(800,), trials=15,
    ),
    ("vander-p", "paper"): dict(
        n=25000, d=20, noise_sd=1e5, node_clip=None,
        p_grid=(2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0, 16.0, 20.0, 25.0),
        m_grid=(1000,), trials=30,
    ),
    ("vander-m", "desk"): dict(
        n=5000, d=10, noise_sd=100.0, node_clip=6.0,
        p_grid=(6.0,), m_grid=(100, 200, 400, 800, 1600), trials=15,
    ),
    ("vander-m", "paper"): dict(
        n=25000, d=20, noise_sd=1e5, node_clip=None,
        p_grid=(6.0,), m_grid=(100, 250, 500, 1000, 2000, 3000), trials=30,
    ),
    ("unstructured", "desk"): dict(
        n=5000, d=10, p_grid=(6.0,), m_grid=(25, 50, 100, 250, 500), trials=20,
    ),
    ("unstructured", "paper"): dict(
        n=25000, d=10, p_grid=(6.0,), m_grid=(10, 25, 50, 100, 250, 500, 1000), trials=50,
    ),
}


def make_config(experiment: str, scale: str = "desk", seed: int = 0, **overrides) -> SweepConfig:
    """Preset sweep configuration; keyword overrides replace any field.

    The paper-scale polynomial preset reads the additive noise as having
    standard deviation 1e5 (i.e. variance 1e10); pass noise_sd=1e10 for the
    other reading.
    """
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; pick one of {EXPERIMENTS}")
    if (experiment, scale) not in _PRESETS:
        raise ValueError(f"unknown scale {scale!r}")
    cfg = SweepConfig(experiment=experiment, scale=scale, seed=seed, **_PRESETS[(experiment, scale)])
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# generators

def gen_vander_experiment(n: int, d: int, noise_sd: float, rng, node_clip: float | None = 6.0):
    """Gaussian-node polynomial instance: b_i = t_i^k + noise.

    The target power k is 10 when d > 10 and d // 2 otherwise, keeping the
    signal inside the column span; clipping |t| <= node_clip keeps the
    highest materialized powers inside double range at desk scale. With
    Gaussian nodes the signal exceeds the noise only in the tails, so most
    rows are uninformative.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    gen = np.random.default_rng(rng)
    nodes = gen.standard_normal(n)
    if node_clip is not None:
        nodes = np.clip(nodes, -node_clip, node_clip)
    target = 10 if d > 10 else max(1, d // 2)
    b = nodes**target + noise_sd * gen.standard_normal(n)
    return VandermondeSpec(nodes, d), b


def gen_unstructured_experiment(n: int, rng):
    """Block-diagonal Gaussian instance with a thin informative block.

    A is block diagonal with a 100 x 6 standard-normal top-left block and
    an (n - 100) x 4 bottom-right block (d = 10). The planted coefficients
    are huge on the first six coordinates (sd 100) and standard normal on
    the rest, and b = A x + z with standard normal z, so nearly all of the
    response mass sits on the first 100 rows.
    """
    if n < 200:
        raise ValueError("need n >= 200")
    gen = np.random.default_rng(rng)
    a = np.zeros((n, 10))
    a[:100, :6] = gen.standard_normal((100, 6))
    a[100:, 6:] = gen.standard_normal((n - 100, 4))
    x = np.concatenate([100.0 * gen.standard_normal(6), gen.standard_normal(4)])
    b = a @ x + gen.standard_normal(n)
    return a, b


# ---------------------------------------------------------------------------
# sweeps

def _trial_seed_sequence(cfg: SweepConfig, grid_index: int, trial: int):
    ss = np.random.SeedSequence([cfg.seed, grid_index, trial])
    seed_id = int(ss.generate_state(1)[0])
    return ss, seed_id


def _timed(fn, timing: bool):
    t0 = time.perf_counter()
    out = fn()
    dt = time.perf_counter() - t0 if timing else 0.0
    return out, dt


def _eps_empirical(a, b, x_hat, p, opt_value) -> float:
    return (lp_norm(a @ x_hat - b, p) - opt_value) / opt_value


def _vander_trial(cfg: SweepConfig, grid_index: int, trial: int):
    p = cfg.p_grid[grid_index] if cfg.sweep_field == "p" else cfg.p_grid[0]
    m = cfg.m_grid[0] if cfg.sweep_field == "p" else cfg.m_grid[grid_index]
    ss, seed_id = _trial_seed_sequence(cfg, grid_index, trial)
    data_ss, lewis_ss, uniform_ss = ss.spawn(3)

    spec, b = gen_vander_experiment(cfg.n, cfg.d, cfg.noise_sd, data_ss, cfg.node_clip)
    a = materialize(spec)
    x_star = solve_lp(a, b, p, tol=cfg.solver_tol)
    opt = lp_norm(a @ x_star - b, p)

    records = []
    for method, method_ss in (("lewis", lewis_ss), ("uniform", uniform_ss)):
        try:
            if method == "lewis":
                x_hat, dt = _timed(
                    lambda: solve_vandermonde_lp(
                        spec, b, p, eps=0.25, m1=m, rng=method_ss,
                        rounding=False, solver_tol=cfg.solver_tol,
                        weight_iterations=cfg.weight_iterations,
                    ),
                    cfg.timing,
                )
            else:
                def run_uniform():
                    s = uniform_sampler(cfg.n, m, p, np.random.default_rng(method_ss))
                    a_s = a[s.indices] * s.scales[:, None]
                    b_s = b[s.indices] * s.scales
                    return solve_lp(a_s, b_s, p, tol=cfg.solver_tol)

                x_hat, dt = _timed(run_uniform, cfg.timing)
            eps_emp = _eps_empirical(a, b, x_hat, p, opt)
        except Exception as exc:  # failed trial: excluded from quantiles
            warnings.warn(f"trial failed ({method}, p={p}, m={m}): {exc}", RuntimeWarning)
            eps_emp, dt = math.nan, 0.0
        records.append(
            TrialRecord(cfg.experiment, method, float(p), int(m), trial, seed_id, eps_emp, dt)
        )
    return records


def run_vander_sweep(cfg: SweepConfig) -> list:
    """Polynomial-instance sweep over p or m: weight sampling vs uniform.

    Each (grid point, trial) cell regenerates data, computes the full-size
    reference solution, and records eps_empirical for both methods.
    """
    if cfg.experiment not in ("vander-p", "vander-m"):
        raise ValueError("config is not a polynomial sweep")
    tasks = [(gi, t) for gi in range(len(cfg.grid)) for t in range(cfg.trials)]
    workers = max_workers()
    if workers > 1:
        args = [(cfg, gi, t) for gi, t in tasks]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_vander_trial, *zip(*args)))
    else:
        chunks = [_vander_trial(cfg, gi, t) for gi, t in tasks]
    records = [rec for chunk in chunks for rec in chunk]
    return sorted(records, key=_record_order)


def run_unstructured_sweep(cfg: SweepConfig) -> list:
    """Block-instance sweep over m; one fixed (A, b) per experiment.

    The matrix, response, reference solution, and row weights are computed
    once from the experiment seed; only the sampling varies across trials,
    so the spread in the records isolates sampling variance. The weight
    exponent comes from the tensor plan for p, so no convex programming is
    involved even though p > 4 sampling is being tested.
    """
    if cfg.experiment != "unstructured":
        raise ValueError("config is not the block-instance sweep")
    p = cfg.p_grid[0]
    data_ss = np.random.SeedSequence([cfg.seed, 0xDA7A])
    a, b = gen_unstructured_experiment(cfg.n, data_ss)
    x_star = solve_lp(a, b, p, tol=cfg.solver_tol)
    opt = lp_norm(a @ x_star - b, p)

    plan = plan_tensor(a.shape[1], p)
    ext = tensor_power_rows(a, plan.r)
    weights = approx_lewis_weights(ext, plan.q, cfg.weight_iterations)

    records = []
    for gi, m in enumerate(cfg.m_grid):
        for trial in range(cfg.trials):
            ss, seed_id = _trial_seed_sequence(cfg, gi, trial)
            lewis_ss, uniform_ss = ss.spawn(2)
            for method, method_ss in (("lewis", lewis_ss), ("uniform", uniform_ss)):
                def run(method=method, method_ss=method_ss):
                    gen = np.random.default_rng(method_ss)
                    if method == "lewis":
                        s = build_sampler(weights, m, p, rng=gen)
                    else:
                        s = uniform_sampler(cfg.n, m, p, gen)
                    a_s = a[s.indices] * s.scales[:, None]
                    b_s = b[s.indices] * s.scales
                    return solve_lp(a_s, b_s, p, tol=cfg.solver_tol)

                try:
                    x_hat, dt = _timed(run, cfg.timing)
                    eps_emp = _eps_empirical(a, b, x_hat, p, opt)
                except Exception as exc:
                    warnings.warn(f"trial failed ({method}, m={m}): {exc}", RuntimeWarning)
                    eps_emp, dt = math.nan, 0.0
                records.append(
                    TrialRecord(cfg.experiment, method, float(p), int(m), trial, seed_id, eps_emp, dt)
                )
    return sorted(records, key=_record_order)


def run_experiment(cfg: SweepConfig) -> list:
    if cfg.experiment == "unstructured":
        return run_unstructured_sweep(cfg)
    return run_vander_sweep(cfg)


def max_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        warnings.warn(f"ignoring non-integer {THREADS_ENV}={raw!r}", RuntimeWarning)
        return 1


def _record_order(r: TrialRecord):
    return (r.experiment, r.p, r.m, r.trial, r.method)


# ---------------------------------------------------------------------------
# aggregation and output

def aggregate(records, sweep_field: str = "m") -> list:
    """Linear-interpolation quartiles of eps_empirical per (method, grid key).

    Failed trials (NaN) are excluded; ``count`` reports how many survived.
    Groups left empty after exclusion are omitted with a warning.
    """
    keys = sorted({(r.experiment, r.method, getattr(r, sweep_field)) for r in records})
    out = []
    for experiment, method, key in keys:
        vals = np.array(
            [
                r.eps_empirical
                for r in records
                if r.experiment == experiment
                and r.method == method
                and getattr(r, sweep_field) == key
                and not math.isnan(r.eps_empirical)
            ]
        )
        if vals.size == 0:
            warnings.warn(
                f"no surviving trials for {experiment}/{method} at {sweep_field}={key}",
                RuntimeWarning,
            )
            continue
        q25, med, q75 = np.percentile(vals, [25.0, 50.0, 75.0])
        out.append(
            QuantileSummary(experiment, method, float(key), float(med), float(q25), float(q75), int(vals.size))
        )
    return out


def _fmt(x) -> str:
    return repr(float(x))


def write_trials_csv(path, records, cfg: SweepConfig | None = None):
    with open(path, "w", newline="\n") as fh:
        if cfg is not None:
            fh.write("# " + " ".join(cfg.as_header_items()) + "\n")
        fh.write("experiment,method,p,m,trial,seed,eps_empirical,wall_time_s\n")
        for r in records:
            fh.write(
                f"{r.experiment},{r.method},{_fmt(r.p)},{r.m},{r.trial},{r.seed},"
                f"{_fmt(r.eps_empirical)},{r.wall_time_s:.6f}\n"
            )


def write_summary_csv(path, summaries, cfg: SweepConfig | None = None):
    with open(path, "w", newline="\n") as fh:
        if cfg is not None:
            fh.write("# " + " ".join(cfg.as_header_items()) + "\n")
        fh.write("experiment,method,key,median,q25,q75,count\n")
        for s in summaries:
            fh.write(
                f"{s.experiment},{s.method},{_fmt(s.key)},{_fmt(s.median)},"
                f"{_fmt(s.q25)},{_fmt(s.q75)},{s.count}\n"
            )


def read_trials_csv(path) -> list:
    records = []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or line.startswith("experiment,"):
                continue
            exp, method, p, m, trial, seed, eps_emp, wall = line.rstrip("\n").split(",")
            records.append(
                TrialRecord(exp, method, float(p), int(m), int(trial), int(seed), float(eps_emp), float(wall))
            )
    return records


def render_svg(path, summaries, sweep_field: str = "m"):
    """Log-scale quartile plot of the summaries."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for method, color in (("lewis", "tab:blue"), ("uniform", "tab:orange")):
        rows = sorted((s for s in summaries if s.method == method), key=lambda s: s.key)
        if not rows:
            continue
        xs = [s.key for s in rows]
        floor = 1e-12  # log axis cannot show exact zeros
        med = [max(s.median, floor) for s in rows]
        lo = [max(s.q25, floor) for s in rows]
        hi = [max(s.q75, floor) for s in rows]
        ax.plot(xs, med, marker="o", color=color, label=method)
        ax.fill_between(xs, lo, hi, color=color, alpha=0.2)
    ax.set_xlabel(sweep_field)
    ax.set_ylabel("relative error")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
