"""Bernstein basis polynomials: evaluation, design matrices, grid weights.

The degree-k basis has k+1 elements indexed r = 0..k; element r is
C(k, r) * t^r * (1-t)^(k-r) on [0, 1].  Binomial coefficients use exact
integer arithmetic up to degree 60 and log-gamma above, so high degrees
stay finite without overflow.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, xlogy

__all__ = ["bernstein_eval", "basis_matrix", "bernstein_weights"]

_EXACT_BINOMIAL_MAX_K = 60

# Endpoint substitution used when a target map diverges at 0 or 1.
ENDPOINT_CLIP = 1e-4


def _check_unit_interval(eta: np.ndarray):
    if np.any(eta < 0.0) or np.any(eta > 1.0):
        raise ValueError("evaluation points must lie in [0, 1]")


def bernstein_eval(r: int, k: int, eta):
    """Value of basis element r of degree k at eta (scalar or array)."""
    if k < 1:
        raise ValueError("degree must be >= 1")
    if not 0 <= r <= k:
        raise ValueError(f"index r={r} outside 0..{k}")
    eta_arr = np.asarray(eta, dtype=float)
    _check_unit_interval(eta_arr)
    if k <= _EXACT_BINOMIAL_MAX_K:
        out = math.comb(k, r) * eta_arr**r * (1.0 - eta_arr) ** (k - r)
    else:
        log_coef = gammaln(k + 1) - gammaln(r + 1) - gammaln(k - r + 1)
        # xlogy gives 0 * log(0) = 0, so endpoint masses come out exact
        out = np.exp(log_coef + xlogy(r, eta_arr) + xlogy(k - r, 1.0 - eta_arr))
    return out if out.ndim else float(out)


def basis_matrix(k: int, etas: np.ndarray) -> np.ndarray:
    """Design matrix with entry (i, r) = basis element r at etas[i].

    Rows sum to 1 (partition of unity).
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    _check_unit_interval(etas)
    return np.column_stack([bernstein_eval(r, k, etas) for r in range(k + 1)])


def bernstein_weights(g, k: int, endpoint_clip: float | None = ENDPOINT_CLIP) -> np.ndarray:
    """Plug-in weights g(r/k) for r = 0..k.

    When the target map is singular at an endpoint (it advertises
    ``singular_at_zero`` / ``singular_at_one``), the endpoint abscissa is
    replaced by ``endpoint_clip`` (resp. 1 - ``endpoint_clip``).  Passing
    ``endpoint_clip=None`` disables the substitution, in which case the
    map's own endpoint error propagates.
    """
    if k < 1:
        raise ValueError("degree must be >= 1")
    etas = np.arange(k + 1, dtype=float) / k
    if endpoint_clip is not None:
        if getattr(g, "singular_at_zero", False):
            etas[0] = endpoint_clip
        if getattr(g, "singular_at_one", False):
            etas[-1] = 1.0 - endpoint_clip
    return np.asarray(g(etas), dtype=float)
