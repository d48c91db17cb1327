"""Weight fitting: ridge least squares (uniform and density-weighted) and
inequality-constrained quadratic programming for one-sided bound fits.

All fits share the objective

    scale * sum_i omega_i |g(eta_i) - sum_r w_r h_r(eta_i)|^2 + (lam/k) * sum_r w_r^2

with omega_i = 1 and scale = 1/N_grid for the uniform criterion, and
omega_i = fhat(eta_i) * delta_i, scale = 1 for the density-weighted one.
Bound fits add the grid-wise constraint that the reconstruction stays on one
side of the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog

from .basis import basis_matrix, bernstein_weights
from .functionals import PosteriorGrid, PosteriorMap, default_eta_grid
from .neighborhood import CountFractions, PosteriorDensityEstimate, interp_density, posterior_density_estimate

__all__ = [
    "FitConfig",
    "BasisWeights",
    "QPSolution",
    "QPInfeasibleError",
    "QPConvergenceError",
    "solve_ridge",
    "solve_constrained_qp",
    "fit_uniform",
    "fit_density_weighted",
    "fit_bound",
    "weights_for_method",
]

DEFAULT_K = 10
DEFAULT_LAMBDA = 0.01


class QPInfeasibleError(ValueError):
    """No point satisfies the constraint set."""


class QPConvergenceError(RuntimeError):
    """Active-set iteration cap hit; carries the best iterate found."""

    def __init__(self, message, x, kkt_residual):
        super().__init__(message)
        self.x = x
        self.kkt_residual = kkt_residual


@dataclass(frozen=True, eq=False)
class FitConfig:
    """Degree, ridge strength, grid and variant selection for one fit."""

    k: int = DEFAULT_K
    lam: float = DEFAULT_LAMBDA
    grid: PosteriorGrid = field(default_factory=default_eta_grid)
    weighting: str = "uniform"  # uniform | density
    constraint: str | None = None  # None | upper_bound | lower_bound

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("degree must be >= 1")
        if self.lam < 0:
            raise ValueError("ridge strength must be >= 0")
        if self.weighting not in ("uniform", "density"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.constraint not in (None, "upper_bound", "lower_bound"):
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if len(self.grid) < self.k + 1:
            raise ValueError("grid must have at least k+1 points (fit underdetermined)")


@dataclass(frozen=True, eq=False)
class BasisWeights:
    """Fitted coefficients plus provenance and solve diagnostics."""

    w: np.ndarray
    objective: float
    method: str
    kkt_residual: float = 0.0
    rank_deficient: bool = False
    fell_back_to_uniform: bool = False

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        if not np.all(np.isfinite(self.w)):
            raise ValueError("weights must be finite")


def solve_ridge(
    A: np.ndarray, b: np.ndarray, scale: float, lambda_term: float
) -> tuple[np.ndarray, bool]:
    """Solve (scale A^T A + lambda_term I) w = scale A^T b.

    Implemented as a stacked least-squares problem, which keeps the
    conditioning of A rather than of A^T A.  With ``lambda_term == 0`` and a
    rank-deficient A the minimum-norm solution is returned and flagged.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("inputs must be finite")
    if scale <= 0 or lambda_term < 0:
        raise ValueError("need scale > 0 and lambda_term >= 0")
    ncols = A.shape[1]
    if lambda_term > 0:
        stacked = np.vstack([np.sqrt(scale) * A, np.sqrt(lambda_term) * np.eye(ncols)])
        rhs = np.concatenate([np.sqrt(scale) * b, np.zeros(ncols)])
    else:
        stacked = np.sqrt(scale) * A
        rhs = np.sqrt(scale) * b
    w, _, rank, _ = np.linalg.lstsq(stacked, rhs, rcond=None)
    return w, rank < ncols


def _kkt_residual(P, q, G, h, x, duals) -> float:
    slack = G @ x - h
    stationarity = np.max(np.abs(P @ x + q + G.T @ duals)) if G.size else np.max(np.abs(P @ x + q))
    primal = max(0.0, float(np.max(slack))) if slack.size else 0.0
    comp = float(np.max(np.abs(duals * slack))) if slack.size else 0.0
    dual = max(0.0, float(-np.min(duals))) if duals.size else 0.0
    return max(stationarity, primal, comp, dual)


@dataclass(frozen=True, eq=False)
class QPSolution:
    x: np.ndarray
    duals: np.ndarray
    kkt_residual: float
    iterations: int
    active: np.ndarray


def _feasible_start(G: np.ndarray, h: np.ndarray) -> np.ndarray:
    res = linprog(
        c=np.zeros(G.shape[1]),
        A_ub=G,
        b_ub=h,
        bounds=[(None, None)] * G.shape[1],
        method="highs",
    )
    if not res.success:
        raise QPInfeasibleError("constraint set is infeasible")
    return res.x


def solve_constrained_qp(
    P: np.ndarray,
    q: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    x0: np.ndarray | None = None,
    max_iter: int | None = None,
) -> QPSolution:
    """Minimize 0.5 x^T P x + q^T x subject to G x <= h (P positive definite).

    Primal active-set iteration: repeatedly solve the equality-constrained
    subproblem on the working set, step to the nearest blocking constraint,
    and drop constraints with negative multipliers at a stationary point.
    Deterministic for fixed inputs; raises ``QPConvergenceError`` with the
    best iterate if the iteration cap is hit.
    """
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float)
    n = P.shape[0]
    m = G.shape[0]
    if max_iter is None:
        max_iter = 100 * n

    if x0 is None:
        x = np.linalg.solve(P, -q)
        if m and np.any(G @ x - h > 1e-10):
            x = _feasible_start(G, h)
    else:
        x = np.asarray(x0, dtype=float).copy()
        if m and np.any(G @ x - h > 1e-9):
            raise ValueError("supplied start point is infeasible")

    working: list[int] = []
    duals = np.zeros(m)
    for iteration in range(1, max_iter + 1):
        grad = P @ x + q
        if working:
            Ga = G[working]
            kkt = np.block([[P, Ga.T], [Ga, np.zeros((len(working), len(working)))]])
            rhs = np.concatenate([-grad, np.zeros(len(working))])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            p = sol[:n]
            mu = sol[n:]
        else:
            p = np.linalg.solve(P, -grad)
            mu = np.zeros(0)

        if np.max(np.abs(p)) <= 1e-11 * (1.0 + np.max(np.abs(x))):
            if mu.size == 0 or np.min(mu) >= -1e-11:
                duals = np.zeros(m)
                duals[working] = np.maximum(mu, 0.0)
                return QPSolution(
                    x=x,
                    duals=duals,
                    kkt_residual=_kkt_residual(P, q, G, h, x, duals),
                    iterations=iteration,
                    active=np.array(sorted(working), dtype=np.int64),
                )
            working.pop(int(np.argmin(mu)))
            continue

        # largest step along p keeping all non-working constraints satisfied
        alpha = 1.0
        blocking = -1
        if m:
            others = np.setdiff1d(np.arange(m), working, assume_unique=False)
            if others.size:
                gp = G[others] @ p
                ahead = gp > 1e-13
                if np.any(ahead):
                    ratios = (h[others][ahead] - G[others][ahead] @ x) / gp[ahead]
                    ratios = np.maximum(ratios, 0.0)
                    j = int(np.argmin(ratios))
                    if ratios[j] < alpha:
                        alpha = float(ratios[j])
                        blocking = int(others[ahead.nonzero()[0][j]])
        x = x + alpha * p
        if blocking >= 0:
            working.append(blocking)

    duals = np.zeros(m)
    raise QPConvergenceError(
        f"active-set iteration cap of {max_iter} reached",
        x=x,
        kkt_residual=_kkt_residual(P, q, G, h, x, duals),
    )


def _grid_weights(cfg: FitConfig, fhat: PosteriorDensityEstimate | None):
    """Per-point objective weights omega_i and the common scale factor."""
    etas = cfg.grid.etas
    if cfg.weighting == "uniform":
        return np.ones(etas.size), 1.0 / etas.size, False
    if fhat is None:
        raise ValueError("density weighting requires a density estimate")
    spacing = np.diff(etas)
    delta = np.append(spacing, spacing[-1])  # trailing spacing reused at the last point
    omega = interp_density(fhat, etas) * delta
    if np.all(omega == 0.0):
        # degenerate density: nothing to weight by, use the uniform criterion
        return np.ones(etas.size), 1.0 / etas.size, True
    return omega, 1.0, False


def _objective(A, target, w, omega, scale, lam, k) -> float:
    resid = target - A @ w
    return float(scale * np.sum(omega * resid**2) + (lam / k) * np.sum(w**2))


def fit_uniform(g: PosteriorMap, cfg: FitConfig) -> BasisWeights:
    """Ridge fit of the basis to g on the grid, every point weighted equally."""
    if cfg.weighting != "uniform":
        raise ValueError("config selects density weighting; use fit_density_weighted")
    A = basis_matrix(cfg.k, cfg.grid.etas)
    target = np.asarray(g(cfg.grid.etas), dtype=float)
    omega, scale, _ = _grid_weights(cfg, None)
    w, rank_deficient = solve_ridge(A, target, scale, cfg.lam / cfg.k)
    return BasisWeights(
        w=w,
        objective=_objective(A, target, w, omega, scale, cfg.lam, cfg.k),
        method="convex_uniform",
        rank_deficient=rank_deficient,
    )


def fit_density_weighted(
    g: PosteriorMap, cfg: FitConfig, fhat: PosteriorDensityEstimate
) -> BasisWeights:
    """Ridge fit with residuals weighted by the estimated posterior density.

    The ridge term is applied exactly as in the uniform criterion and is not
    rescaled by the total density mass.
    """
    if cfg.weighting != "density":
        raise ValueError("config selects uniform weighting; use fit_uniform")
    A = basis_matrix(cfg.k, cfg.grid.etas)
    target = np.asarray(g(cfg.grid.etas), dtype=float)
    omega, scale, fell_back = _grid_weights(cfg, fhat)
    root = np.sqrt(scale * omega)
    w, rank_deficient = solve_ridge(root[:, None] * A, root * target, 1.0, cfg.lam / cfg.k)
    return BasisWeights(
        w=w,
        objective=_objective(A, target, w, omega, scale, cfg.lam, cfg.k),
        method="convex_uniform" if fell_back else "convex_density",
        rank_deficient=rank_deficient,
        fell_back_to_uniform=fell_back,
    )


def fit_bound(
    g: PosteriorMap, cfg: FitConfig, fhat: PosteriorDensityEstimate | None = None
) -> BasisWeights:
    """Ridge fit constrained to stay on one side of g at every grid point.

    "upper_bound" enforces reconstruction >= g; "lower_bound" mirrors it.
    """
    if cfg.constraint not in ("upper_bound", "lower_bound"):
        raise ValueError("config must select upper_bound or lower_bound")
    A = basis_matrix(cfg.k, cfg.grid.etas)
    target = np.asarray(g(cfg.grid.etas), dtype=float)
    omega, scale, fell_back = _grid_weights(cfg, fhat if cfg.weighting == "density" else None)

    P = 2.0 * (scale * (A.T * omega) @ A + (cfg.lam / cfg.k) * np.eye(cfg.k + 1))
    qvec = -2.0 * scale * (A.T * omega) @ target
    if cfg.constraint == "upper_bound":
        Gmat, hvec = -A, -target
        start = np.full(cfg.k + 1, float(np.max(target)) + 1.0)
    else:
        Gmat, hvec = A, target
        start = np.full(cfg.k + 1, float(np.min(target)) - 1.0)
    # rows of A sum to 1, so a constant weight vector is always feasible
    sol = solve_constrained_qp(P, qvec, Gmat, hvec, x0=start)
    return BasisWeights(
        w=sol.x,
        objective=_objective(A, target, sol.x, omega, scale, cfg.lam, cfg.k),
        method="convex_bound",
        kkt_residual=sol.kkt_residual,
        fell_back_to_uniform=fell_back,
    )


def weights_for_method(
    g: PosteriorMap, cfg: FitConfig, method: str, cf: CountFractions | None = None
) -> BasisWeights:
    """Dispatch one of the weighting schemes by its method tag.

    "bernstein" plugs in g(r/k); "convex_uniform" and "convex_density" run
    the corresponding ridge fits, the latter estimating the posterior
    density from the supplied count fractions.
    """
    if method == "bernstein":
        w = bernstein_weights(g, cfg.k)
        A = basis_matrix(cfg.k, cfg.grid.etas)
        target = np.asarray(g(cfg.grid.etas), dtype=float)
        obj = _objective(A, target, w, np.ones(len(cfg.grid)), 1.0 / len(cfg.grid), cfg.lam, cfg.k)
        return BasisWeights(w=w, objective=obj, method="bernstein")
    if method == "convex_uniform":
        return fit_uniform(g, replace(cfg, weighting="uniform"))
    if method == "convex_density":
        if cf is None:
            raise ValueError("convex_density requires count fractions")
        fhat = posterior_density_estimate(cf)
        return fit_density_weighted(g, replace(cfg, weighting="density"), fhat)
    raise ValueError(f"unknown weighting method {method!r}")
