"""Ward agglomerative clustering on a precomputed dissimilarity matrix.

``ward_linkage`` applies the Lance-Williams Ward update directly to the
given dissimilarities (the classical ``"ward"`` / Ward.D behaviour); pass
``squared=True`` to square them first and report square-rooted heights
(Ward.D2).

Cluster ids follow the scipy convention: leaves are ``0..n-1`` and the
cluster formed at step ``s`` gets id ``n + s``.  When several pairs share the
minimum distance the pair whose members have the smallest leaf indexes
(compared lexicographically) is merged first.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numba as nb
import numpy as np

__all__ = [
    "Dendrogram",
    "ClusterLabels",
    "SilhouetteReport",
    "ward_linkage",
    "cut_tree",
    "silhouette",
    "write_labels_csv",
    "write_silhouette_csv",
]


@dataclass(frozen=True)
class Dendrogram:
    merges: np.ndarray  # (n - 1, 4): left id, right id, height, size
    n: int

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]

    def to_linkage(self) -> np.ndarray:
        """The merge table as a scipy linkage matrix."""
        return self.merges.copy()

    def to_dict(self) -> dict:
        return {
            "merges": [[int(l), int(r), float(h), int(s)] for l, r, h, s in self.merges],
            "n": self.n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Dendrogram":
        data = json.loads(text)
        merges = np.array(data["merges"], dtype=float).reshape(-1, 4)
        return cls(merges, int(data["n"]))

    def to_newick(self, labels=None) -> str:
        labels = list(labels) if labels is not None else [str(i + 1) for i in range(self.n)]
        text: dict[int, str] = {}
        height = {i: 0.0 for i in range(self.n)}
        for i in range(self.n):
            text[i] = labels[i]
        for s, (left, right, h, _) in enumerate(self.merges):
            left, right = int(left), int(right)
            parts = [f"{text.pop(c)}:{float(h) - height[c]!r}" for c in (left, right)]
            text[self.n + s] = "(" + ",".join(parts) + ")"
            height[self.n + s] = float(h)
        if self.n == 1:
            return labels[0] + ";"
        return text[2 * self.n - 2] + ";"


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    k: int


@dataclass
class SilhouetteReport:
    widths: np.ndarray
    cluster_means: dict[int, float]
    mean: float
    degenerate: bool = False


@nb.njit(cache=True)
def _nearest(D, active, i, n):
    best = -1
    bd = np.inf
    for j in range(i + 1, n):
        if active[j] and D[i, j] < bd:
            bd = D[i, j]
            best = j
    return best, bd


@nb.njit(cache=True)
def _ward_kernel(D, squared):
    n = D.shape[0]
    active = np.ones(n, dtype=np.bool_)
    size = np.ones(n)
    ids = np.arange(n)
    nn = np.empty(n, dtype=np.int64)
    dmin = np.empty(n)
    for i in range(n):
        nn[i], dmin[i] = _nearest(D, active, i, n)
    merges = np.empty((n - 1, 4))
    for step in range(n - 1):
        i = -1
        bd = np.inf
        for k in range(n):
            if active[k] and nn[k] >= 0 and dmin[k] <= bd and (i < 0 or dmin[k] < bd):
                bd = dmin[k]
                i = k
        j = nn[i]
        dij = D[i, j]
        a, b = ids[i], ids[j]
        merges[step, 0] = min(a, b)
        merges[step, 1] = max(a, b)
        merges[step, 2] = np.sqrt(dij) if squared else dij
        merges[step, 3] = size[i] + size[j]
        ni = size[i]
        nj = size[j]
        for k in range(n):
            if active[k] and k != i and k != j:
                nk = size[k]
                d = ((ni + nk) * D[i, k] + (nj + nk) * D[j, k] - nk * dij) / (ni + nj + nk)
                D[i, k] = d
                D[k, i] = d
        active[j] = False
        size[i] = ni + nj
        ids[i] = n + step
        for k in range(n):
            if not active[k]:
                continue
            if k == i or nn[k] == i or nn[k] == j:
                nn[k], dmin[k] = _nearest(D, active, k, n)
            elif k < i:
                d = D[k, i]
                if d < dmin[k] or (d == dmin[k] and i < nn[k]):
                    nn[k] = i
                    dmin[k] = d
    return merges


def ward_linkage(D, squared: bool = False) -> Dendrogram:
    values = np.array(getattr(D, "values", D), dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError("dissimilarity matrix must be square")
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least two items to cluster")
    if not np.isfinite(values).all() or (values < 0).any():
        raise ValueError("dissimilarities must be finite and nonnegative")
    if not np.array_equal(values, values.T):
        raise ValueError("dissimilarity matrix must be symmetric")
    work = values * values if squared else values.copy()
    return Dendrogram(_ward_kernel(np.ascontiguousarray(work), squared), n)


def cut_tree(dg: Dendrogram, k: int) -> ClusterLabels:
    """Undo the last ``k - 1`` merges; groups numbered by first leaf appearance."""
    n = dg.n
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    parent = list(range(2 * n - 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s in range(n - k):
        left, right = int(dg.merges[s, 0]), int(dg.merges[s, 1])
        parent[find(left)] = n + s
        parent[find(right)] = n + s
    numbering: dict[int, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for leaf in range(n):
        root = find(leaf)
        labels[leaf] = numbering.setdefault(root, len(numbering) + 1)
    return ClusterLabels(labels, k)


def silhouette(labels, D) -> SilhouetteReport:
    """Rousseeuw silhouette widths from a dissimilarity matrix.

    Members of singleton clusters get width 0.  With a single cluster every
    width is 0 and the report is flagged ``degenerate``.
    """
    lab = np.asarray(getattr(labels, "labels", labels))
    values = np.asarray(getattr(D, "values", D), dtype=float)
    n = lab.size
    if values.shape != (n, n):
        raise ValueError(f"labels have {n} entries, matrix is {values.shape}")
    groups = np.unique(lab)
    if groups.size < 2:
        warnings.warn("silhouette undefined for a single cluster; widths set to 0", stacklevel=2)
        widths = np.zeros(n)
        return SilhouetteReport(widths, {int(g): 0.0 for g in groups}, 0.0, degenerate=True)
    sums = np.stack([values[:, lab == g].sum(axis=1) for g in groups], axis=1)
    counts = np.array([np.count_nonzero(lab == g) for g in groups], dtype=float)
    own = np.searchsorted(groups, lab)
    rows = np.arange(n)
    own_count = counts[own]
    with np.errstate(divide="ignore", invalid="ignore"):
        a = sums[rows, own] / (own_count - 1)
        mean_to = sums / counts
    mean_to[rows, own] = np.inf
    b = mean_to.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        widths = np.where((own_count > 1) & (denom > 0), (b - a) / denom, 0.0)
    means = {int(g): float(widths[lab == g].mean()) for g in groups}
    return SilhouetteReport(widths, means, float(widths.mean()))


def write_labels_csv(path, labels: ClusterLabels, names) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "cluster"])
        for name, c in zip(names, labels.labels):
            w.writerow([name, int(c)])


def write_silhouette_csv(path, labels: ClusterLabels, report: SilhouetteReport, names) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "cluster", "width"])
        for name, c, s in zip(names, labels.labels, report.widths):
            w.writerow([name, int(c), repr(float(s))])
