"""Half-region and modified half-region depth of curves."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .dataset import FunctionalDataset

__all__ = [
    "DepthMethod",
    "DepthReport",
    "hypo_epi_proportions",
    "depth_hr",
    "length_proportions",
    "depth_mhr",
    "depth_all",
    "rank_depths",
]


class DepthMethod(str, enum.Enum):
    HR = "hr"
    MHR = "mhr"

    @classmethod
    def parse(cls, value) -> "DepthMethod":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def rank_depths(values) -> np.ndarray:
    """1 for the deepest curve; ties go to the lower curve index."""
    values = np.asarray(values, dtype=float)
    order = np.lexsort((np.arange(values.size), -values))
    ranks = np.empty(values.size, dtype=np.int64)
    ranks[order] = np.arange(1, values.size + 1)
    return ranks


@dataclass
class DepthReport:
    method: DepthMethod
    values: np.ndarray
    ranks: np.ndarray
    tau: np.ndarray | None = None
    labels: list[str] | None = None

    @classmethod
    def from_values(cls, method, values, tau=None, labels=None) -> "DepthReport":
        values = np.asarray(values, dtype=float)
        return cls(DepthMethod.parse(method), values, rank_depths(values), tau, labels)

    def to_dict(self) -> dict:
        out = {"method": self.method.value}
        if self.tau is not None:
            out["tau"] = [float(t) for t in self.tau]
        out["values"] = [float(v) for v in self.values]
        out["ranks"] = [int(r) for r in self.ranks]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        labels = self.labels or [str(i + 1) for i in range(self.values.size)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "value", "rank"])
        for lab, v, r in zip(labels, self.values, self.ranks):
            w.writerow([lab, repr(float(v)), int(r)])
        return buf.getvalue()


_NO_TAU_CACHE: dict[int, np.ndarray] = {}


def _infinite_tau(p: int) -> np.ndarray:
    tau = _NO_TAU_CACHE.get(p)
    if tau is None:
        tau = _NO_TAU_CACHE[p] = np.full(p, np.inf)
    return tau


def _query(y, ds: FunctionalDataset) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=float)
    if y.shape != (ds.p,):
        raise ValueError(f"curve has shape {y.shape}, dataset grid has {ds.p} points")
    return y


def hypo_epi_proportions(y, ds: FunctionalDataset) -> tuple[float, float]:
    """Fractions of sample curves lying entirely below / entirely above ``y``.

    Ties count for both sides.
    """
    y = _query(y, ds)
    n_hyp, n_epi = K.slab_counts_pair(ds.curves, y, y, _infinite_tau(ds.p))
    return n_hyp / ds.n, n_epi / ds.n


def depth_hr(y, ds: FunctionalDataset) -> float:
    return min(hypo_epi_proportions(y, ds))


def length_proportions(y, ds: FunctionalDataset) -> tuple[float, float]:
    """Mean weighted time the sample spends above (``el``) and below (``hl``) ``y``."""
    y = _query(y, ds)
    el, hl = K.band_lengths_pair(ds.curves, ds.weights, y, y, _infinite_tau(ds.p))
    return float(el), float(hl)


def depth_mhr(y, ds: FunctionalDataset) -> float:
    return min(length_proportions(y, ds))


def depth_all(ds: FunctionalDataset, method=DepthMethod.HR) -> DepthReport:
    """Depth of every sample curve against the whole sample, itself included."""
    method = DepthMethod.parse(method)
    tau = _infinite_tau(ds.p)
    if method is DepthMethod.HR:
        counts = K.slab_counts_batch(ds.curves, ds.curves, tau)
        values = counts.min(axis=1) / ds.n
    else:
        values = K.band_lengths_batch(ds.curves, ds.weights, ds.curves, tau).min(axis=1)
    return DepthReport.from_values(method, values, labels=ds.curve_labels())
