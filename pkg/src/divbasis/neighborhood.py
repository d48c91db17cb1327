"""k-NN neighborhoods on pooled data and the label-count statistics.

Each point's neighborhood is the point itself plus its k-1 nearest other
points under Euclidean distance, with distance ties broken toward the lower
index.  The per-point class-1 member count feeds the count-fraction vector
(the empirical basis statistic) and, rescaled, a sample of the posterior's
own density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .datasets import LabeledDataset

__all__ = [
    "knn_neighborhoods",
    "label_counts",
    "count_fractions",
    "CountFractions",
    "PosteriorDensityEstimate",
    "posterior_density_estimate",
    "interp_density",
]

_BRUTE_CHUNK_ROWS = 512
# "auto" switches from the O(N^2 d) scan to a k-d tree above this size; both
# return identical neighborhoods whenever no distance ties are present.
_AUTO_TREE_THRESHOLD = 2048


@dataclass(frozen=True, eq=False)
class CountFractions:
    """Fractions of neighborhoods containing exactly r class-1 members.

    ``fractions[r] = counts[r] / n`` for r = 0..k; the integer counts
    partition the sample, so the fractions sum to one.
    """

    fractions: np.ndarray
    counts: np.ndarray
    k: int
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "fractions", np.asarray(self.fractions, dtype=float))
        if counts.shape != (self.k + 1,) or self.fractions.shape != (self.k + 1,):
            raise ValueError("need exactly k+1 entries")
        if counts.sum() != self.n:
            raise ValueError("counts must partition the sample")
        if not (2 <= self.k < self.n):
            raise ValueError("need 2 <= k < n")


def _knn_brute(points: np.ndarray, k: int) -> np.ndarray:
    n = points.shape[0]
    out = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _BRUTE_CHUNK_ROWS):
        stop = min(start + _BRUTE_CHUNK_ROWS, n)
        block = cdist(points[start:stop], points)
        block[np.arange(stop - start), np.arange(start, stop)] = -1.0  # self first
        for i in range(stop - start):
            row = block[i]
            kth = np.partition(row, k - 1)[k - 1]
            cand = np.flatnonzero(row <= kth)
            if cand.size > k:
                strictly = cand[row[cand] < kth]
                tied = cand[row[cand] == kth]
                cand = np.concatenate([strictly, tied[: k - strictly.size]])
            out[start + i] = cand
    return out


def _knn_tree(points: np.ndarray, k: int) -> np.ndarray:
    _, idx = cKDTree(points).query(points, k=k)
    return np.atleast_2d(idx).astype(np.int64)


def knn_neighborhoods(points: np.ndarray, k: int, algorithm: str = "brute") -> np.ndarray:
    """Index matrix (N, k): row i holds i itself plus its k-1 nearest others.

    ``algorithm`` is "brute" (exact scan, the reference), "tree" (k-d tree
    accelerator, identical on tie-free data), or "auto".
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    if not np.all(np.isfinite(points)):
        raise ValueError("coordinates must be finite")
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= N, got k={k}, N={n}")
    if algorithm == "auto":
        algorithm = "brute" if n <= _AUTO_TREE_THRESHOLD else "tree"
    if algorithm == "brute":
        return _knn_brute(points, k)
    if algorithm == "tree":
        return _knn_tree(points, k)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def label_counts(labels: np.ndarray, neighborhoods: np.ndarray) -> np.ndarray:
    """Number of class-1 members in each neighborhood, self included."""
    labels = np.asarray(labels, dtype=np.int64)
    return labels[neighborhoods].sum(axis=1)


def count_fractions(ds: LabeledDataset, k: int, algorithm: str = "auto") -> CountFractions:
    """Empirical count-fraction vector for neighborhood size k."""
    if not 2 <= k < ds.n:
        raise ValueError(f"need 2 <= k < N, got k={k}, N={ds.n}")
    neigh = knn_neighborhoods(ds.points, k, algorithm=algorithm)
    phi = label_counts(ds.labels, neigh)
    counts = np.bincount(phi, minlength=k + 1)
    return CountFractions(fractions=counts / ds.n, counts=counts, k=k, n=ds.n)


@dataclass(frozen=True, eq=False)
class PosteriorDensityEstimate:
    """Samples of the posterior's density at the abscissae r/k."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid", np.asarray(self.grid, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.grid.shape != self.values.shape or self.grid.ndim != 1:
            raise ValueError("grid and values must be matching 1-d arrays")
        if np.any(self.values < 0.0):
            raise ValueError("density samples must be nonnegative")


def posterior_density_estimate(cf: CountFractions) -> PosteriorDensityEstimate:
    """Density samples k * fraction[r] at abscissa r/k.

    The piecewise-linear interpolant integrates to roughly one; exact
    normalization holds only in the large-sample limit.
    """
    grid = np.arange(cf.k + 1, dtype=float) / cf.k
    return PosteriorDensityEstimate(grid=grid, values=cf.k * cf.fractions)


def interp_density(est: PosteriorDensityEstimate, etas: np.ndarray) -> np.ndarray:
    """Linear interpolation of the density samples; exact at grid points."""
    etas = np.asarray(etas, dtype=float)
    if np.any(etas < est.grid[0]) or np.any(etas > est.grid[-1]):
        raise ValueError("query points must lie within the sampled range")
    return np.interp(etas, est.grid, est.values)
