"""Monte Carlo experiment runner: divergence-estimation sweeps over sample
size, Bayes-error-bound tables, per-trial CSV emission and aggregation.

Trials are seeded as seed_base + trial index, so reruns of an identical
configuration are byte-identical.  A failing estimator aborts only its own
(method, N, trial) cell, which is recorded as a NaN row.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .datasets import (
    LabeledDataset,
    experiment_specs,
    fukunaga_specs,
    make_experiment_dataset,
    make_fukunaga_dataset,
)
from .estimators import (
    bhattacharyya_bounds,
    dp_bounds,
    estimate_ber_upper_bound,
    mst_dp_estimate,
    parametric_plugin,
)
from .functionals import default_eta_grid, dp_map, hellinger_map, posterior_map
from .neighborhood import count_fractions
from .optimize import FitConfig, weights_for_method
from .oracles import (
    GroundTruth,
    analytic_gaussian_divergence,
    asymptotic_fractions,
    mc_integral_functional,
    true_ber,
)

__all__ = [
    "ExperimentConfig",
    "RawRow",
    "AggregateRow",
    "ResultTable",
    "run_divergence_experiment",
    "run_bounds_experiment",
    "divergence_truth",
    "ber_truth",
    "render_raw_csv",
    "render_aggregate_csv",
    "render_theory_csv",
]

DIVERGENCE_METHODS = ("bernstein", "convex_uniform", "convex_density", "parametric_plugin")
BOUND_METHODS = ("bc_bound", "mst_dp", "convex_bound")

DEFAULT_N_SWEEP = (100, 200, 500, 1000, 2000, 5000, 10000)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs: data source, functional, methods, sweep."""

    experiment: int | None = None
    fukunaga: int | None = None
    functional: str = "hellinger"
    methods: tuple[str, ...] = DIVERGENCE_METHODS
    k: int = 10
    lam: float = 0.01
    grid_kind: str = "auto"  # auto | standard | kl_clipped
    n_values: tuple[int, ...] = DEFAULT_N_SWEEP
    trials: int = 100
    seed_base: int = 0
    d: int = 3
    oracle_draws: int = 1_000_000
    oracle_seed: int = 1_234_567

    def __post_init__(self):
        if (self.experiment is None) == (self.fukunaga is None):
            raise ValueError("set exactly one of experiment or fukunaga")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        if any(n <= self.k for n in self.n_values):
            raise ValueError("every N must exceed k")
        if any(n % 2 != 0 for n in self.n_values):
            raise ValueError("N values must be even (balanced classes)")

    def specs(self):
        if self.experiment is not None:
            return experiment_specs(self.experiment, self.d)
        return fukunaga_specs(self.fukunaga)

    def dataset(self, n_total: int, seed: int) -> LabeledDataset:
        if self.experiment is not None:
            return make_experiment_dataset(self.experiment, n_total // 2, self.d, seed)
        return make_fukunaga_dataset(self.fukunaga, n_total, seed)

    def grid(self):
        kind = self.grid_kind
        if kind == "auto":
            kind = "kl_clipped" if self.functional.startswith("kl") else "standard"
        return default_eta_grid(kind)


class RawRow(NamedTuple):
    method: str
    n: int
    trial: int
    seed: int
    estimate: float
    truth: float
    error: float


class AggregateRow(NamedTuple):
    method: str
    n: int
    trials: int
    mean: float
    mse: float
    std: float


@dataclass(frozen=True)
class ResultTable:
    raw: list[RawRow]
    aggregates: list[AggregateRow]
    truth: GroundTruth
    theory: dict[str, float] = field(default_factory=dict)


def divergence_truth(cfg: ExperimentConfig) -> GroundTruth:
    """Reference value of the configured functional: closed form for
    Gaussian pairs where available, Monte Carlo otherwise."""
    f0, f1 = cfg.specs()
    both_gaussian = hasattr(f0, "cov") and hasattr(f1, "cov")
    if both_gaussian and cfg.functional == "hellinger":
        return analytic_gaussian_divergence("hellinger_sq", f0.mean, f0.cov, f1.mean, f1.cov)
    if both_gaussian and cfg.functional == "kl01":
        return analytic_gaussian_divergence("kl", f0.mean, f0.cov, f1.mean, f1.cov)
    if both_gaussian and cfg.functional == "kl10":
        return analytic_gaussian_divergence("kl", f1.mean, f1.cov, f0.mean, f0.cov)
    pm = posterior_map(cfg.functional, 0.5, 0.5)
    return mc_integral_functional(f0, f1, pm, 0.5, cfg.oracle_draws, cfg.oracle_seed)


def ber_truth(cfg: ExperimentConfig) -> GroundTruth:
    """True Bayes error of the configured pair, analytic when covariances
    match and Monte Carlo otherwise."""
    f0, f1 = cfg.specs()
    if hasattr(f0, "cov") and hasattr(f1, "cov") and np.allclose(f0.cov, f1.cov):
        return true_ber(f0, f1, method="analytic_equal_cov")
    return true_ber(f0, f1, method="mc", n_draws=cfg.oracle_draws, seed=cfg.oracle_seed)


def _aggregate(raw: list[RawRow], methods, n_values, trials) -> list[AggregateRow]:
    by_cell: dict[tuple[str, int], list[RawRow]] = {}
    for row in raw:
        by_cell.setdefault((row.method, row.n), []).append(row)
    out = []
    for method in methods:
        for n in n_values:
            rows = by_cell.get((method, n), [])
            estimates = np.array([r.estimate for r in rows])
            ok = np.isfinite(estimates)
            good = estimates[ok]
            errors = np.array([r.error for r in rows])[ok]
            if good.size == 0:
                out.append(AggregateRow(method, n, 0, np.nan, np.nan, np.nan))
                continue
            std = float(np.std(good, ddof=1)) if good.size > 1 else 0.0
            out.append(
                AggregateRow(
                    method,
                    n,
                    int(good.size),
                    float(np.mean(good)),
                    float(np.mean(errors**2)),
                    std,
                )
            )
    return out


def run_divergence_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Sweep (method, N, trial) cells estimating the configured functional.

    The count fractions of each trial dataset are shared across the
    basis-expansion methods; dataset-independent weights are fitted once.
    """
    unknown = set(cfg.methods) - set(DIVERGENCE_METHODS)
    if unknown:
        raise ValueError(f"unknown divergence methods: {sorted(unknown)}")
    truth = divergence_truth(cfg)
    pm = posterior_map(cfg.functional, 0.5, 0.5)
    fit_cfg = FitConfig(k=cfg.k, lam=cfg.lam, grid=cfg.grid())

    fixed_weights = {}
    for method in cfg.methods:
        if method in ("bernstein", "convex_uniform"):
            fixed_weights[method] = weights_for_method(pm, fit_cfg, method).w

    cells: dict[tuple[str, int, int], RawRow] = {}
    for n in cfg.n_values:
        for trial in range(cfg.trials):
            seed = cfg.seed_base + trial
            ds = cfg.dataset(n, seed)
            cf = None
            needs_cf = any(m != "parametric_plugin" for m in cfg.methods)
            if needs_cf:
                cf = count_fractions(ds, cfg.k)
            for method in cfg.methods:
                try:
                    if method in fixed_weights:
                        estimate = float(fixed_weights[method] @ cf.fractions)
                    elif method == "convex_density":
                        w = weights_for_method(pm, fit_cfg, "convex_density", cf).w
                        estimate = float(w @ cf.fractions)
                    else:
                        estimate = parametric_plugin(ds, cfg.functional, seed=seed).value
                except Exception:
                    estimate = np.nan
                error = truth.value - estimate
                cells[(method, n, trial)] = RawRow(method, n, trial, seed, estimate, truth.value, error)

    raw = [
        cells[(method, n, trial)]
        for method in cfg.methods
        for n in cfg.n_values
        for trial in range(cfg.trials)
    ]
    return ResultTable(
        raw=raw,
        aggregates=_aggregate(raw, cfg.methods, cfg.n_values, cfg.trials),
        truth=truth,
    )


def run_bounds_experiment(cfg: ExperimentConfig) -> ResultTable:
    """Estimate the three Bayes-error upper bounds per (N, trial) cell.

    The theory entries hold each bound's large-sample value alongside the
    true Bayes error.
    """
    methods = tuple(m for m in cfg.methods if m in BOUND_METHODS) or BOUND_METHODS
    truth = ber_truth(cfg)
    f0, f1 = cfg.specs()
    grid = default_eta_grid("standard")
    bound_cfg = FitConfig(k=cfg.k, lam=cfg.lam, grid=grid, constraint="upper_bound")

    theory: dict[str, float] = {"true_ber": truth.value}
    if "bc_bound" in methods:
        both_gaussian = hasattr(f0, "cov") and hasattr(f1, "cov")
        if both_gaussian:
            h2 = analytic_gaussian_divergence("hellinger_sq", f0.mean, f0.cov, f1.mean, f1.cov).value
        else:
            h2 = mc_integral_functional(
                f0, f1, hellinger_map(), 0.5, cfg.oracle_draws, cfg.oracle_seed + 1
            ).value
        theory["bc_bound"] = bhattacharyya_bounds(h2).upper
    if "mst_dp" in methods:
        dp_half = mc_integral_functional(
            f0, f1, dp_map(0.5), 0.5, cfg.oracle_draws, cfg.oracle_seed + 2
        ).value
        theory["mst_dp"] = dp_bounds(dp_half).upper
    if "convex_bound" in methods:
        from .optimize import fit_bound
        from .functionals import ber_map

        w = fit_bound(ber_map(), bound_cfg).w
        limits = asymptotic_fractions(f0, f1, 0.5, cfg.k, cfg.oracle_draws, cfg.oracle_seed + 3)
        theory["convex_bound"] = float(w @ limits)

    cells: dict[tuple[str, int, int], RawRow] = {}
    for n in cfg.n_values:
        for trial in range(cfg.trials):
            seed = cfg.seed_base + trial
            ds = cfg.dataset(n, seed)
            for method in methods:
                try:
                    if method == "bc_bound":
                        h2 = parametric_plugin(ds, "hellinger", seed=seed).value
                        estimate = bhattacharyya_bounds(h2).upper
                    elif method == "mst_dp":
                        estimate = dp_bounds(mst_dp_estimate(ds)).upper
                    else:
                        estimate = estimate_ber_upper_bound(ds, bound_cfg, seed=seed).value
                except Exception:
                    estimate = np.nan
                error = truth.value - estimate
                cells[(method, n, trial)] = RawRow(method, n, trial, seed, estimate, truth.value, error)

    raw = [
        cells[(method, n, trial)]
        for method in methods
        for n in cfg.n_values
        for trial in range(cfg.trials)
    ]
    return ResultTable(
        raw=raw,
        aggregates=_aggregate(raw, methods, cfg.n_values, cfg.trials),
        truth=truth,
        theory=theory,
    )


def _f(x) -> str:
    return repr(float(x))


def render_raw_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    buf.write("method,N,trial,seed,estimate,truth,error\n")
    for r in table.raw:
        buf.write(
            f"{r.method},{r.n},{r.trial},{r.seed},{_f(r.estimate)},{_f(r.truth)},{_f(r.error)}\n"
        )
    return buf.getvalue()


def render_aggregate_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    buf.write("method,N,trials,mean,mse,std\n")
    for a in table.aggregates:
        buf.write(f"{a.method},{a.n},{a.trials},{_f(a.mean)},{_f(a.mse)},{_f(a.std)}\n")
    return buf.getvalue()


def render_theory_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    buf.write("method,value\n")
    for method, value in table.theory.items():
        buf.write(f"{method},{_f(value)}\n")
    return buf.getvalue()
