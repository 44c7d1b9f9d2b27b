"""Local half-region and local modified half-region depth.

The locality threshold ``tau`` is a nonnegative value per grid point (a
scalar is broadcast).  A curve counts toward the lower side of ``y`` when it
stays inside the slab ``[y - tau, y]`` at every grid point, and toward the
upper side when it stays inside ``[y, y + tau]``.  The modified variant
replaces all-or-nothing containment by the weighted time spent in each slab,
for curves that stay within ``[y - tau, y + tau]`` throughout.

With ``tau`` at least the range of the data both reduce to the global
depths of :mod:`fdepth.depth`; with ``tau = 0`` they count exact duplicates
of ``y``.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .dataset import FunctionalDataset, as_tau
from .depth import DepthMethod, DepthReport, _query

__all__ = [
    "band_contains",
    "local_hypo_epi_proportions",
    "local_depth_hr",
    "local_length_proportions",
    "local_depth_mhr",
    "local_depth_all",
]


def band_contains(member, center, tau) -> bool:
    member = np.asarray(member, dtype=float)
    center = np.asarray(center, dtype=float)
    if member.shape != center.shape:
        raise ValueError(f"length mismatch: {member.shape} vs {center.shape}")
    tau = as_tau(tau, center.size)
    return bool(np.all((center - member <= tau) & (member - center <= tau)))


def local_hypo_epi_proportions(y, ds: FunctionalDataset, tau) -> tuple[float, float]:
    y = _query(y, ds)
    n_hyp, n_epi = K.slab_counts_pair(ds.curves, y, y, as_tau(tau, ds.p))
    return n_hyp / ds.n, n_epi / ds.n


def local_depth_hr(y, ds: FunctionalDataset, tau) -> float:
    return min(local_hypo_epi_proportions(y, ds, tau))


def local_length_proportions(y, ds: FunctionalDataset, tau) -> tuple[float, float]:
    y = _query(y, ds)
    el, hl = K.band_lengths_pair(ds.curves, ds.weights, y, y, as_tau(tau, ds.p))
    return float(el), float(hl)


def local_depth_mhr(y, ds: FunctionalDataset, tau) -> float:
    return min(local_length_proportions(y, ds, tau))


def local_depth_all(ds: FunctionalDataset, tau, method=DepthMethod.HR) -> DepthReport:
    method = DepthMethod.parse(method)
    tau = as_tau(tau, ds.p)
    if method is DepthMethod.HR:
        values = K.slab_counts_batch(ds.curves, ds.curves, tau).min(axis=1) / ds.n
    else:
        values = K.band_lengths_batch(ds.curves, ds.weights, ds.curves, tau).min(axis=1)
    return DepthReport.from_values(method, values, tau=tau, labels=ds.curve_labels())
