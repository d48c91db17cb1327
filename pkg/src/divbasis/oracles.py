"""Ground-truth values for benchmarking the sample-based estimators.

Closed-form Gaussian divergences, Monte Carlo integration of posterior maps
under known densities, the large-sample limit of the count fractions, true
Bayes error, and the split of total estimation error into its approximation
and sampling parts.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

from .datasets import LabeledDataset
from .functionals import PosteriorMap, ber_map
from .basis import basis_matrix
from .neighborhood import count_fractions
from .optimize import FitConfig, weights_for_method

__all__ = [
    "GroundTruth",
    "analytic_gaussian_divergence",
    "posterior_draws",
    "mc_integral_functional",
    "asymptotic_fractions",
    "true_ber",
    "error_decomposition",
    "normal_cdf",
    "truth_manifest_header",
    "truth_manifest_row",
    "parse_truth_manifest",
]

_MC_CHUNK = 200_000


@dataclass(frozen=True)
class GroundTruth:
    """A reference value with its provenance and Monte Carlo uncertainty."""

    value: float
    method: str  # analytic | mc_integration | quadrature
    mc_samples: int = 0
    std_error: float = 0.0

    def __post_init__(self):
        if self.method == "analytic" and self.std_error != 0.0:
            raise ValueError("analytic truths carry zero standard error")
        if self.method != "analytic" and self.mc_samples <= 0:
            raise ValueError("sampled truths must record their sample count")


def normal_cdf(x):
    """Standard normal CDF, accurate to better than 1e-12."""
    return ndtr(x)


def _logdet_and_check(S: np.ndarray, name: str) -> float:
    try:
        chol = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"{name} must be positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def analytic_gaussian_divergence(target: str, mu0, S0, mu1, S1) -> GroundTruth:
    """Closed-form squared Hellinger distance or KL(f0||f1) between Gaussians."""
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=float))
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    S0 = np.atleast_2d(np.asarray(S0, dtype=float))
    S1 = np.atleast_2d(np.asarray(S1, dtype=float))
    d = mu0.size
    logdet0 = _logdet_and_check(S0, "S0")
    logdet1 = _logdet_and_check(S1, "S1")
    dm = mu1 - mu0
    if target == "hellinger_sq":
        M = 0.5 * (S0 + S1)
        logdet_m = _logdet_and_check(M, "(S0+S1)/2")
        maha = float(dm @ np.linalg.solve(M, dm))
        coeff = np.exp(0.25 * logdet0 + 0.25 * logdet1 - 0.5 * logdet_m - 0.125 * maha)
        return GroundTruth(value=1.0 - coeff, method="analytic")
    if target == "kl":
        S1_inv_S0 = np.linalg.solve(S1, S0)
        maha = float(dm @ np.linalg.solve(S1, dm))
        value = 0.5 * (np.trace(S1_inv_S0) + maha - d + logdet1 - logdet0)
        return GroundTruth(value=float(value), method="analytic")
    raise ValueError(f"unknown target {target!r}")


def posterior_draws(f0, f1, p0: float, n_draws: int, seed: int) -> np.ndarray:
    """Class-1 posterior values at n_draws mixture samples from (f0, f1).

    The posterior is computed from the true log-densities, so draws landing
    outside one class's support map to an exact 0 or 1.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError("p0 must lie strictly inside (0, 1)")
    p1 = 1.0 - p0
    rng = np.random.default_rng(seed)
    etas = np.empty(n_draws)
    log_prior_ratio = np.log(p1) - np.log(p0)
    filled = 0
    while filled < n_draws:
        m = min(_MC_CHUNK, n_draws - filled)
        from_f1 = rng.random(m) < p1
        n0 = int(np.count_nonzero(~from_f1))
        x = np.empty((m, f0.dim))
        x[~from_f1] = f0.sample(n0, rng)
        x[from_f1] = f1.sample(m - n0, rng)
        with np.errstate(invalid="ignore"):
            log_ratio = log_prior_ratio + f1.logpdf(x) - f0.logpdf(x)
        etas[filled : filled + m] = expit(log_ratio)
        filled += m
    return etas


def mc_integral_functional(
    f0, f1, g: PosteriorMap, p0: float, n_draws: int, seed: int
) -> GroundTruth:
    """Monte Carlo value of the mixture expectation of g."""
    if n_draws < 10_000:
        raise ValueError("need at least 1e4 draws for a usable standard error")
    etas = posterior_draws(f0, f1, p0, n_draws, seed)
    values = np.asarray(g(etas), dtype=float)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / np.sqrt(n_draws))
    return GroundTruth(value=mean, method="mc_integration", mc_samples=n_draws, std_error=se)


def asymptotic_fractions(f0, f1, p0: float, k: int, n_draws: int, seed: int) -> np.ndarray:
    """Large-sample limits of the count fractions: mixture means of the basis.

    Each sampled basis row sums to one pointwise, so the averaged vector is
    renormalized to sum to exactly one.
    """
    if k < 1:
        raise ValueError("degree must be >= 1")
    rng = np.random.default_rng(seed)
    p1 = 1.0 - p0
    sums = np.zeros(k + 1)
    log_prior_ratio = np.log(p1) - np.log(p0)
    done = 0
    while done < n_draws:
        m = min(_MC_CHUNK, n_draws - done)
        from_f1 = rng.random(m) < p1
        n0 = int(np.count_nonzero(~from_f1))
        x = np.empty((m, f0.dim))
        x[~from_f1] = f0.sample(n0, rng)
        x[from_f1] = f1.sample(m - n0, rng)
        etas = expit(log_prior_ratio + f1.logpdf(x) - f0.logpdf(x))
        sums += basis_matrix(k, etas).sum(axis=0)
        done += m
    out = sums / n_draws
    out = out / out.sum()
    # push any last-ulp rounding from the division onto the largest entry
    for _ in range(3):
        excess = out.sum() - 1.0
        if excess == 0.0:
            break
        out[int(np.argmax(out))] -= excess
    return out


def true_ber(
    f0,
    f1,
    p0: float = 0.5,
    method: str = "mc",
    n_draws: int = 1_000_000,
    seed: int = 0,
) -> GroundTruth:
    """True Bayes error rate of the pair, analytic or Monte Carlo.

    The analytic path covers balanced equal-covariance Gaussians, where the
    error is the normal CDF at minus half the Mahalanobis distance between
    the means.
    """
    if method == "analytic_equal_cov":
        if not (hasattr(f0, "cov") and hasattr(f1, "cov")):
            raise ValueError("analytic path requires Gaussian specs")
        if not np.allclose(f0.cov, f1.cov):
            raise ValueError("analytic path requires equal covariances")
        if abs(p0 - 0.5) > 1e-12:
            raise ValueError("analytic path assumes balanced priors")
        dm = f1.mean - f0.mean
        delta = float(np.sqrt(dm @ np.linalg.solve(f0.cov, dm)))
        return GroundTruth(value=float(normal_cdf(-0.5 * delta)), method="analytic")
    if method == "mc":
        return mc_integral_functional(f0, f1, ber_map(), p0, n_draws, seed)
    raise ValueError(f"unknown method {method!r}")


def error_decomposition(
    ds: LabeledDataset,
    g: PosteriorMap,
    cfg: FitConfig,
    truth: GroundTruth,
    limit_fractions: np.ndarray,
    method: str = "convex_uniform",
) -> tuple[float, float, float]:
    """Split truth minus estimate into approximation and sampling parts.

    Returns (e_approx, e_sampling, e_total) where e_approx compares the
    truth against the weights applied to the asymptotic fractions, e_sampling
    against the drift from asymptotic to empirical fractions, and their sum
    reproduces the total error by construction.
    """
    limit_fractions = np.asarray(limit_fractions, dtype=float)
    if limit_fractions.shape != (cfg.k + 1,):
        raise ValueError("limit fractions must have k+1 entries")
    cf = count_fractions(ds, cfg.k)
    w = weights_for_method(g, cfg, method, cf).w
    at_limit = float(w @ limit_fractions)
    at_sample = float(w @ cf.fractions)
    e_approx = truth.value - at_limit
    e_sampling = at_limit - at_sample
    e_total = truth.value - at_sample
    return e_approx, e_sampling, e_total


TRUTH_MANIFEST_FIELDS = ("experiment", "functional", "mc_samples", "seed", "value", "std_error", "method")


def truth_manifest_header() -> str:
    return ",".join(TRUTH_MANIFEST_FIELDS)


def truth_manifest_row(experiment: str, functional: str, seed: int, gt: GroundTruth) -> str:
    return ",".join(
        [
            experiment,
            functional,
            str(gt.mc_samples),
            str(seed),
            repr(float(gt.value)),
            repr(float(gt.std_error)),
            gt.method,
        ]
    )


def parse_truth_manifest(text: str) -> dict[tuple[str, str, int, int], GroundTruth]:
    """Map (experiment, functional, mc_samples, seed) to cached truths."""
    out: dict[tuple[str, str, int, int], GroundTruth] = {}
    lines = [ln for ln in io.StringIO(text).read().splitlines() if ln.strip()]
    if not lines:
        return out
    if lines[0] != truth_manifest_header():
        raise ValueError("unrecognized truth manifest header")
    for ln in lines[1:]:
        experiment, functional, samples, seed, value, std_error, method = ln.split(",")
        key = (experiment, functional, int(samples), int(seed))
        out[key] = GroundTruth(
            value=float(value),
            method=method,
            mc_samples=int(samples),
            std_error=float(std_error),
        )
    return out
