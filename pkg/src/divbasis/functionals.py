"""Target maps on the class-1 posterior and the discretized posterior grids.

Every supported functional of a two-class pair (squared Hellinger distance,
the two directed KL divergences, the quadratic mixture divergence, the Bayes
error rate, and any f-divergence supplied through its convex generator) is
the mixture expectation of a scalar map of the posterior.  This module holds
those maps in closed form plus the generic adapter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PosteriorMap",
    "PosteriorGrid",
    "hellinger_map",
    "kl_map",
    "dp_map",
    "ber_map",
    "map_from_phi",
    "posterior_map",
    "default_eta_grid",
]

FAMILIES = ("hellinger", "kl01", "kl10", "dp", "ber", "generic_phi")


def _check_priors(p0: float, p1: float):
    if not (0.0 < p0 < 1.0 and 0.0 < p1 < 1.0):
        raise ValueError("priors must lie strictly inside (0, 1)")
    if abs(p0 + p1 - 1.0) > 1e-12:
        raise ValueError("priors must sum to 1")


@dataclass(frozen=True)
class PosteriorMap:
    """Evaluable scalar map of the class-1 posterior.

    ``singular_at_zero`` / ``singular_at_one`` flag endpoints where the map
    diverges or is undefined, so fitting code can substitute a clipped
    abscissa instead of evaluating there.
    """

    family: str
    p0: float = 0.5
    p1: float = 0.5
    phi: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        _check_priors(self.p0, self.p1)
        if self.family == "generic_phi" and self.phi is None:
            raise ValueError("generic_phi requires a phi callable")

    @property
    def singular_at_zero(self) -> bool:
        return self.family in ("kl01", "kl10", "generic_phi")

    @property
    def singular_at_one(self) -> bool:
        return self.family in ("kl01", "kl10")

    def __call__(self, eta):
        eta_arr = np.asarray(eta, dtype=float)
        scalar = eta_arr.ndim == 0
        eta_arr = np.atleast_1d(eta_arr)
        if np.any(eta_arr < 0.0) or np.any(eta_arr > 1.0):
            raise ValueError("posterior values must lie in [0, 1]")
        if self.singular_at_zero and np.any(eta_arr == 0.0):
            raise ValueError(f"{self.family} map is undefined at eta = 0")
        if self.singular_at_one and np.any(eta_arr == 1.0):
            raise ValueError(f"{self.family} map is undefined at eta = 1")
        out = self._eval(eta_arr)
        return float(out[0]) if scalar else out

    def _eval(self, eta: np.ndarray) -> np.ndarray:
        p0, p1 = self.p0, self.p1
        if self.family == "hellinger":
            return 0.5 * (np.sqrt(eta / p1) - np.sqrt((1.0 - eta) / p0)) ** 2
        if self.family == "kl01":
            return ((1.0 - eta) / p0) * np.log(p1 * (1.0 - eta) / (p0 * eta))
        if self.family == "kl10":
            return (eta / p1) * np.log(p0 * eta / (p1 * (1.0 - eta)))
        if self.family == "dp":
            return ((2.0 * eta - 1.0) ** 2 - (2.0 * p0 - 1.0) ** 2) / (4.0 * p0 * (1.0 - p0))
        if self.family == "ber":
            return np.minimum(eta, 1.0 - eta)
        # generic f-divergence: eta/p1 * phi(p1 (1-eta) / (p0 eta))
        ratio = p1 * (1.0 - eta) / (p0 * eta)
        return (eta / p1) * np.asarray(self.phi(ratio), dtype=float)


def hellinger_map(p0: float = 0.5, p1: float = 0.5) -> PosteriorMap:
    """Map whose mixture expectation is the squared Hellinger distance."""
    return PosteriorMap("hellinger", p0, p1)


def kl_map(direction: str, p0: float = 0.5, p1: float = 0.5) -> PosteriorMap:
    """Directed KL map: "kl01" targets d(f0||f1), "kl10" targets d(f1||f0)."""
    if direction not in ("kl01", "kl10"):
        raise ValueError("direction must be 'kl01' or 'kl10'")
    return PosteriorMap(direction, p0, p1)


def dp_map(p0: float = 0.5) -> PosteriorMap:
    """Quadratic mixture-divergence map; reduces to (2 eta - 1)^2 at p0 = 0.5."""
    return PosteriorMap("dp", p0, 1.0 - p0)


def ber_map() -> PosteriorMap:
    """Bayes-error map min(eta, 1 - eta); prior-free."""
    return PosteriorMap("ber")


def map_from_phi(phi: Callable, p0: float = 0.5, p1: float = 0.5) -> PosteriorMap:
    """Adapter from the convex generator of an f-divergence."""
    return PosteriorMap("generic_phi", p0, p1, phi=phi)


def posterior_map(family: str, p0: float = 0.5, p1: float = 0.5) -> PosteriorMap:
    """Look up a built-in map by family name."""
    if family == "hellinger":
        return hellinger_map(p0, p1)
    if family in ("kl01", "kl10"):
        return kl_map(family, p0, p1)
    if family == "dp":
        return dp_map(p0)
    if family == "ber":
        return ber_map()
    raise ValueError(f"unknown functional family {family!r}")


@dataclass(frozen=True, eq=False)
class PosteriorGrid:
    """Strictly increasing posterior abscissae used for weight fitting."""

    etas: np.ndarray
    epsilon: float | None = None

    def __post_init__(self):
        etas = np.asarray(self.etas, dtype=float)
        object.__setattr__(self, "etas", etas)
        if etas.ndim != 1 or etas.size < 2:
            raise ValueError("grid must be a 1-d array with at least 2 points")
        if etas[0] < 0.0 or etas[-1] > 1.0:
            raise ValueError("grid must lie within [0, 1]")
        if np.any(np.diff(etas) <= 0.0):
            raise ValueError("grid must be strictly increasing")

    def __len__(self) -> int:
        return self.etas.size


def default_eta_grid(kind: str = "standard") -> PosteriorGrid:
    """101-point grid {0, 0.01, ..., 1}; "kl_clipped" replaces the endpoints
    by 1e-4 and 1 - 1e-4 so log-singular maps stay evaluable."""
    etas = np.arange(101, dtype=float) / 100.0
    if kind == "standard":
        return PosteriorGrid(etas=etas)
    if kind == "kl_clipped":
        eps = 1e-4
        etas[0] = eps
        etas[-1] = 1.0 - eps
        return PosteriorGrid(etas=etas, epsilon=eps)
    raise ValueError(f"unknown grid kind {kind!r}")
