"""Functional datasets on a shared time grid.

Curves are stored as an ``(n, p)`` float array, one row per curve, all
evaluated on the same strictly increasing grid.  Grid weights play the role
of the normalized Lebesgue measure, so a "proportion of time" is a weighted
sum over grid points.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ._kernels import pairwise_sup

__all__ = [
    "Grid",
    "FunctionalDataset",
    "TauSelection",
    "DatasetError",
    "as_tau",
    "load_csv",
    "write_csv",
    "validate",
    "sup_distance",
    "pairwise_sup_distances",
    "select_tau",
    "affine_transform",
    "standardize_mad",
]

_NA_TOKENS = {"", "na", "nan", "null", "none", "?"}


class DatasetError(ValueError):
    """Raised for malformed input: parse, shape or missing-value problems."""


@dataclass(frozen=True)
class Grid:
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def uniform(cls, p: int, points: Sequence[float] | None = None) -> "Grid":
        if p < 1:
            raise DatasetError("grid needs at least one point")
        pts = np.arange(1, p + 1, dtype=float) if points is None else np.asarray(points, float)
        return cls(pts, np.full(p, 1.0 / p))

    @classmethod
    def trapezoid(cls, points: Sequence[float]) -> "Grid":
        """Trapezoidal quadrature weights, normalized to one.

        A single point gets weight one.
        """
        pts = np.asarray(points, dtype=float)
        if pts.size == 1:
            return cls(pts, np.ones(1))
        gaps = np.diff(pts)
        w = np.zeros_like(pts)
        w[:-1] += gaps / 2
        w[1:] += gaps / 2
        return cls(pts, w / w.sum())

    @property
    def size(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class FunctionalDataset:
    grid: Grid
    curves: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        curves = np.ascontiguousarray(self.curves, dtype=float)
        if curves.ndim == 1:
            curves = curves[None, :]
        curves.setflags(write=False)
        object.__setattr__(self, "curves", curves)
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))

    @classmethod
    def from_array(cls, curves, grid: Grid | None = None, labels=None) -> "FunctionalDataset":
        curves = np.atleast_2d(np.asarray(curves, dtype=float))
        if grid is None:
            grid = Grid.uniform(curves.shape[1])
        return cls(grid, curves, labels)

    @property
    def n(self) -> int:
        return self.curves.shape[0]

    @property
    def p(self) -> int:
        return self.curves.shape[1]

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    def curve_labels(self) -> list[str]:
        if self.labels is not None:
            return list(self.labels)
        return [str(i + 1) for i in range(self.n)]

    def check(self) -> "FunctionalDataset":
        problems = validate(self)
        if problems:
            raise DatasetError("; ".join(problems))
        return self


@dataclass
class TauSelection:
    probs: list[float]
    quantiles: list[float]
    stats: list[float] | None = field(default=None)

    def to_dict(self) -> dict:
        out = {"probs": list(self.probs), "quantiles": list(self.quantiles)}
        if self.stats is not None:
            out["stats"] = list(self.stats)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def as_tau(tau, p: int) -> np.ndarray:
    """Broadcast a scalar or per-grid-point threshold to a length-``p`` array."""
    arr = np.asarray(tau, dtype=float)
    if arr.ndim == 0:
        arr = np.full(p, float(arr))
    arr = arr.ravel()
    if arr.size != p:
        raise ValueError(f"tau has {arr.size} values, grid has {p}")
    if np.isnan(arr).any() or (arr < 0).any():
        raise ValueError("tau must be nonnegative")
    return np.ascontiguousarray(arr)


def validate(ds: FunctionalDataset) -> list[str]:
    """Report every broken invariant of ``ds``; never raises."""
    problems = []
    pts = np.asarray(ds.grid.points, dtype=float)
    wts = np.asarray(ds.grid.weights, dtype=float)
    if pts.size < 1:
        problems.append("grid is empty")
    if pts.size > 1 and not np.all(np.diff(pts) > 0):
        problems.append("grid not strictly increasing")
    if wts.shape != pts.shape:
        problems.append("weights length does not match grid")
    else:
        if not np.all(wts > 0):
            problems.append("weights not all positive")
        if abs(wts.sum() - 1.0) > 1e-12:
            problems.append("weights not normalized")
    curves = ds.curves
    if curves.ndim != 2 or curves.shape[0] < 1:
        problems.append("dataset has no curves")
    elif curves.shape[1] != pts.size:
        problems.append(f"curves have {curves.shape[1]} columns, grid has {pts.size} points")
    if curves.size and not np.isfinite(curves).all():
        problems.append("curves contain missing or non-finite values")
    if ds.labels is not None and len(ds.labels) != curves.shape[0]:
        problems.append("label count does not match curve count")
    return problems


def _parse_cell(text: str, row: int, col: int) -> float:
    token = text.strip()
    if token.lower() in _NA_TOKENS:
        raise DatasetError(f"missing value at row {row}, column {col}")
    try:
        value = float(token)
    except ValueError:
        raise DatasetError(f"non-numeric value {token!r} at row {row}, column {col}") from None
    if not math.isfinite(value):
        raise DatasetError(f"missing value at row {row}, column {col}")
    return value


def load_csv(
    path,
    byrow: bool = True,
    has_header: bool = False,
    grid_spec: Grid | Sequence[float] | None = None,
    label_column: bool = False,
) -> FunctionalDataset:
    """Read a rectangular numeric CSV into a dataset.

    With ``byrow`` each row is a curve; otherwise the table is transposed
    first.  Row and column numbers in error messages are 1-based and count
    the header line.  ``grid_spec`` may be a :class:`Grid` or a sequence of
    time points (uniform weights); default is ``1..p`` with weights ``1/p``.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    start = 1 if has_header else 0
    body = rows[start:]
    if not body:
        raise DatasetError(f"{path}: no data rows")
    labels = None
    if label_column:
        labels = [r[0].strip() for r in body]
        body = [r[1:] for r in body]
    width = len(body[0])
    table = np.empty((len(body), width))
    for i, r in enumerate(body):
        if len(r) != width:
            raise DatasetError(
                f"ragged rows: row {i + start + 1} has {len(r)} cells, expected {width}"
            )
        off = 2 if label_column else 1
        for j, cell in enumerate(r):
            table[i, j] = _parse_cell(cell, i + start + 1, j + off)
    if not byrow:
        table = table.T
        labels = None
    if grid_spec is None:
        grid = Grid.uniform(table.shape[1])
    elif isinstance(grid_spec, Grid):
        grid = grid_spec
    else:
        grid = Grid.uniform(table.shape[1], grid_spec)
    return FunctionalDataset(grid, table, labels).check()


def write_csv(ds: FunctionalDataset, path, header: bool = False, label_column: bool = False) -> None:
    # repr gives the shortest string that round-trips a double exactly
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow((["label"] if label_column else []) + [repr(float(t)) for t in ds.grid.points])
        for lab, row in zip(ds.curve_labels(), ds.curves):
            cells = [repr(float(v)) for v in row]
            w.writerow([lab] + cells if label_column else cells)


def sup_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return float(np.max(np.abs(a - b)))


def pairwise_sup_distances(ds: FunctionalDataset) -> np.ndarray:
    """Sup-norm distance for every pair ``i < j``, row-major order."""
    if ds.n < 2:
        raise ValueError("need at least two curves for pairwise distances")
    return pairwise_sup(ds.curves)


def select_tau(ds: FunctionalDataset, probs, keep_stats: bool = False) -> TauSelection:
    """Quantiles of the pairwise sup-norm distances.

    Uses linear interpolation between order statistics at position
    ``(m - 1) * prob`` (numpy's default ``"linear"`` method).
    """
    probs = [float(q) for q in np.atleast_1d(probs)]
    for q in probs:
        if not 0.0 <= q <= 1.0:
            raise ValueError(f"quantile order {q} outside [0, 1]")
    dist = pairwise_sup_distances(ds)
    quant = np.quantile(dist, probs, method="linear")
    return TauSelection(
        probs=probs,
        quantiles=[float(v) for v in quant],
        stats=[float(v) for v in dist] if keep_stats else None,
    )


def affine_transform(ds: FunctionalDataset, a, b) -> FunctionalDataset:
    """Map every curve value ``y(t_k)`` to ``a_k * y(t_k) + b_k``."""
    a = np.broadcast_to(np.asarray(a, dtype=float), (ds.p,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (ds.p,))
    if not (np.all(a > 0) or np.all(a < 0)):
        raise ValueError("scale must be nonzero with a constant sign over the grid")
    return FunctionalDataset(ds.grid, ds.curves * a + b, ds.labels)


def standardize_mad(ds: FunctionalDataset) -> FunctionalDataset:
    """Center each grid point at its median and divide by the raw MAD.

    No consistency constant is applied.  Grid points with zero MAD are only
    centered.
    """
    med = np.median(ds.curves, axis=0)
    mad = np.median(np.abs(ds.curves - med), axis=0)
    scale = np.where(mad > 0, mad, 1.0)
    return FunctionalDataset(ds.grid, (ds.curves - med) / scale, ds.labels)
