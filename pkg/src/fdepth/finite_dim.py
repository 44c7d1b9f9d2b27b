"""Local half-region depth for points in R^p.

A point is treated as a function on the coordinate indexes, so slabs become
axis-aligned boxes ``[x - tau, x]`` (lower) and ``[x, x + tau]`` (upper)
with one half-width per coordinate.  Besides direct counting, the box
probability can be written through the empirical distribution function by
inclusion-exclusion; that path is exponential in ``p`` and exists as an
independent check.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "as_sample",
    "slab_region_prob_direct",
    "slab_region_prob_ie",
    "local_depth_hr_finite",
    "local_depth_hr_finite_all",
    "local_halfspace_depth_1d",
    "MAX_IE_DIM",
]

MAX_IE_DIM = 20


def as_sample(points) -> np.ndarray:
    """Validate an ``(m, p)`` point sample; a 1-d array is read as ``m`` scalars."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError("sample must be a non-empty (m, p) array")
    if not np.isfinite(arr).all():
        raise ValueError("sample contains non-finite values")
    return arr


def _prepare(x, sample, tau):
    sample = as_sample(sample)
    p = sample.shape[1]
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p:
        raise ValueError(f"point has {x.size} coordinates, sample has {p}")
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (p,))
    if np.isnan(tau).any() or (tau < 0).any():
        raise ValueError("tau must be nonnegative")
    return x, sample, tau


def _check_side(side: str) -> str:
    if side not in ("lower", "upper"):
        raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")
    return side


def slab_region_prob_direct(x, sample, tau, side: str = "lower") -> float:
    """Empirical probability of the box ``[x - tau, x]`` or ``[x, x + tau]``."""
    x, sample, tau = _prepare(x, sample, tau)
    if _check_side(side) == "lower":
        inside = (sample >= x - tau) & (sample <= x)
    else:
        inside = (sample >= x) & (sample <= x + tau)
    return np.count_nonzero(inside.all(axis=1)) / sample.shape[0]


def _lower_box_ie_count(x, sample, tau) -> int:
    p = sample.shape[1]
    at_most = sample <= x
    strictly_below = sample < x - tau
    total = 0
    for mask in range(1 << p):
        subset = np.array([(mask >> j) & 1 for j in range(p)], dtype=bool)
        # F evaluated with left limits on the coordinates in the subset
        hit = np.where(subset, strictly_below, at_most).all(axis=1)
        sign = -1 if bin(mask).count("1") % 2 else 1
        total += sign * int(np.count_nonzero(hit))
    return total


def slab_region_prob_ie(x, sample, tau, side: str = "lower") -> float:
    """Box probability by inclusion-exclusion over the empirical CDF.

    The upper box is reduced to the lower one by reflecting the data and the
    point through the origin.
    """
    x, sample, tau = _prepare(x, sample, tau)
    if sample.shape[1] > MAX_IE_DIM:
        raise ValueError(f"inclusion-exclusion needs 2^p terms; p={sample.shape[1]} > {MAX_IE_DIM}")
    if _check_side(side) == "upper":
        x, sample = -x, -sample
    return _lower_box_ie_count(x, sample, tau) / sample.shape[0]


def local_depth_hr_finite(x, sample, tau, use_ie: bool = False) -> float:
    prob = slab_region_prob_ie if use_ie else slab_region_prob_direct
    return min(prob(x, sample, tau, "lower"), prob(x, sample, tau, "upper"))


def local_depth_hr_finite_all(sample, tau) -> np.ndarray:
    """Local depth of every sample point against the sample."""
    sample = as_sample(sample)
    if sample.shape[1] == 1:
        col = sample[:, 0]
        t = float(np.broadcast_to(np.asarray(tau, dtype=float), (1,))[0])
        return np.array([local_halfspace_depth_1d(v, col, t) for v in col])
    return np.array([local_depth_hr_finite(row, sample, tau) for row in sample])


def local_halfspace_depth_1d(x: float, sample, tau: float) -> float:
    """``min(F(x) - F((x - tau)-), F(x + tau) - F(x-))`` for the empirical CDF ``F``."""
    data = np.sort(np.asarray(sample, dtype=float).reshape(-1))
    if data.size == 0:
        raise ValueError("empty sample")
    tau = float(tau)
    if not tau >= 0:
        raise ValueError("tau must be nonnegative")
    x = float(x)

    def cdf(v):
        return int(np.searchsorted(data, v, side="right"))

    def cdf_left(v):
        return int(np.searchsorted(data, v, side="left"))

    lower = cdf(x) - cdf_left(x - tau)
    upper = cdf(x + tau) - cdf_left(x)
    return min(lower, upper) / data.size
