"""Depth-based similarity between pairs of curves.

The similarity of ``x`` and ``y`` is the depth-type score of the pair's
envelope ``w = min(x, y)``, ``z = max(x, y)``.  Globally a curve counts on
the lower side when it lies below ``w`` and on the upper side when it lies
above ``z``.  The local versions use the regions shared by both curves'
slabs, ``[z - tau, w]`` and ``[z, w + tau]``; for the modified method this
is exactly what the joint band ``[z - tau, w + tau]`` produces.  For
``x == y`` the similarity reduces to the depth of ``x``, and it never
exceeds the depth of either curve.

Matrices are dense ``(n, n)`` float64 arrays, so memory is ``8 n^2`` bytes.
:func:`iter_similarity_rows` and :func:`write_matrix_stream` compute blocks
of full rows for inputs where the whole matrix should not be materialized.
"""

from __future__ import annotations

import csv
import enum
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import _kernels as K
from .dataset import FunctionalDataset, as_tau
from .depth import _query

__all__ = [
    "SimilarityMethod",
    "SimilarityMatrix",
    "DissimilarityMatrix",
    "envelope",
    "sim_hr",
    "local_sim_hr",
    "local_sim_mhr",
    "similarity_matrix",
    "iter_similarity_rows",
    "gower_dissimilarity",
    "write_matrix_csv",
    "read_matrix_csv",
    "write_matrix_binary",
    "read_matrix_binary",
    "write_matrix_stream",
    "BINARY_MAGIC",
    "InvariantError",
]

BINARY_MAGIC = b"FDSIMM01"


class InvariantError(ValueError):
    """A similarity matrix breaks ``s_ij <= (s_ii + s_jj) / 2``."""


class SimilarityMethod(str, enum.Enum):
    HR = "hr"
    MHR = "mhr"
    LOCAL_HR = "localhr"
    LOCAL_MHR = "localmhr"

    @classmethod
    def parse(cls, value) -> "SimilarityMethod":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("_", ""))

    @property
    def is_local(self) -> bool:
        return self in (SimilarityMethod.LOCAL_HR, SimilarityMethod.LOCAL_MHR)

    @property
    def is_modified(self) -> bool:
        return self in (SimilarityMethod.MHR, SimilarityMethod.LOCAL_MHR)


@dataclass
class SimilarityMatrix:
    values: np.ndarray
    method: SimilarityMethod
    tau: np.ndarray | None = None
    labels: list[str] | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass
class DissimilarityMatrix:
    values: np.ndarray
    labels: list[str] | None = None

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def condensed(self) -> np.ndarray:
        iu = np.triu_indices(self.n, k=1)
        return self.values[iu]


def envelope(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return np.minimum(x, y), np.maximum(x, y)


def _pair(x, y, ds):
    w, z = envelope(_query(x, ds), _query(y, ds))
    return np.ascontiguousarray(w), np.ascontiguousarray(z)


def sim_hr(x, y, ds: FunctionalDataset) -> float:
    w, z = _pair(x, y, ds)
    a, b = K.slab_counts_pair(ds.curves, w, z, np.full(ds.p, np.inf))
    return min(a, b) / ds.n


def local_sim_hr(x, y, ds: FunctionalDataset, tau) -> float:
    w, z = _pair(x, y, ds)
    a, b = K.slab_counts_pair(ds.curves, w, z, as_tau(tau, ds.p))
    return min(a, b) / ds.n


def local_sim_mhr(x, y, ds: FunctionalDataset, tau) -> float:
    w, z = _pair(x, y, ds)
    el, hl = K.band_lengths_pair(ds.curves, ds.weights, w, z, as_tau(tau, ds.p))
    return min(el, hl)


def _method_tau(ds, method, tau):
    method = SimilarityMethod.parse(method)
    if method.is_local:
        if tau is None:
            raise ValueError(f"method {method.value!r} needs tau")
        return method, as_tau(tau, ds.p)
    return method, np.full(ds.p, np.inf)


def _kernel_args(ds, method, t):
    """``(mode, lists, n_ge, n_le)`` for :func:`_kernels.similarity_rows`."""
    none = np.zeros(1, dtype=np.int64), np.zeros(1, dtype=np.int32)
    no_counts = np.zeros((1, 1), dtype=np.int64)
    if not method.is_modified:
        lists = K.relation_lists(ds.curves, 1, t) + K.relation_lists(ds.curves, 2, t)
        return 0, lists, no_counts, no_counts
    if np.isinf(t).all():
        return 2, none + none, *K.rank_counts(ds.curves)
    ptr, idx = K.relation_lists(ds.curves, 0, t)
    return 1, (ptr, idx, ptr, idx), no_counts, no_counts


def similarity_matrix(ds: FunctionalDataset, method="localmhr", tau=None) -> SimilarityMatrix:
    """All pairwise similarities; the diagonal holds the matching depths.

    ``tau`` is required for the local methods and ignored otherwise.
    """
    method, t = _method_tau(ds, method, tau)
    upper = K.similarity_rows(ds.curves, ds.weights, t, 0, ds.n, -1, *_kernel_args(ds, method, t))
    full = np.triu(upper) + np.triu(upper, k=1).T
    return SimilarityMatrix(full, method, t if method.is_local else None, ds.curve_labels())


def iter_similarity_rows(
    ds: FunctionalDataset, method="localmhr", tau=None, block_rows: int = 256
) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_row, block)`` with full rows of the similarity matrix."""
    if block_rows < 1:
        raise ValueError("block_rows must be positive")
    method, t = _method_tau(ds, method, tau)
    args = _kernel_args(ds, method, t)
    for start in range(0, ds.n, block_rows):
        stop = min(ds.n, start + block_rows)
        yield start, K.similarity_rows(ds.curves, ds.weights, t, start, stop, 0, *args)


def _gower(diag_rows, diag_cols, block):
    sq = diag_rows[:, None] + diag_cols[None, :] - 2.0 * block
    if (sq < -1e-12).any():
        i, j = np.unravel_index(np.argmin(sq), sq.shape)
        raise InvariantError(
            f"similarity entry ({i}, {j}) exceeds the mean of its diagonal entries; "
            "matrix is not a valid similarity"
        )
    return np.sqrt(np.maximum(sq, 0.0))


def gower_dissimilarity(S) -> DissimilarityMatrix:
    """``d_ij = sqrt(s_ii + s_jj - 2 s_ij)``, tiny negatives clamped to zero."""
    values = S.values if isinstance(S, SimilarityMatrix) else np.asarray(S, dtype=float)
    labels = S.labels if isinstance(S, SimilarityMatrix) else None
    diag = np.diag(values).copy()
    return DissimilarityMatrix(_gower(diag, diag, values), labels)


def _matrix_values(M):
    if isinstance(M, (SimilarityMatrix, DissimilarityMatrix)):
        return M.values, M.labels
    return np.asarray(M, dtype=float), None


def write_matrix_csv(M, path, labels=None) -> None:
    values, own = _matrix_values(M)
    labels = labels or own or [str(i + 1) for i in range(values.shape[0])]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["label", *labels])
        for lab, row in zip(labels, values):
            w.writerow([lab, *(repr(float(v)) for v in row)])


def read_matrix_csv(path) -> tuple[np.ndarray, list[str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    labels = rows[0][1:]
    values = np.array([[float(c) for c in r[1:]] for r in rows[1:]])
    return values, labels


def _header(n: int) -> bytes:
    return BINARY_MAGIC + struct.pack("<Q", n)


def write_matrix_binary(M, path) -> None:
    """Magic ``FDSIMM01``, little-endian u64 ``n``, then ``n*n`` little-endian doubles."""
    values, _ = _matrix_values(M)
    with Path(path).open("wb") as fh:
        fh.write(_header(values.shape[0]))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_matrix_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:8] != BINARY_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:8]!r}")
    (n,) = struct.unpack("<Q", raw[8:16])
    body = np.frombuffer(raw, dtype="<f8", offset=16)
    if body.size != n * n:
        raise ValueError(f"{path}: expected {n * n} values, found {body.size}")
    return body.reshape(n, n).astype(float)


def write_matrix_stream(
    ds: FunctionalDataset,
    path,
    method="localmhr",
    tau=None,
    block_rows: int = 256,
    dissimilarity: bool = False,
    fmt: str = "binary",
) -> None:
    """Compute and write the matrix block by block without holding it in memory."""
    method, t = _method_tau(ds, method, tau)
    diag = None
    if dissimilarity:
        if method.is_modified:
            diag = K.band_lengths_batch(ds.curves, ds.weights, ds.curves, t).min(axis=1)
        else:
            diag = K.slab_counts_batch(ds.curves, ds.curves, t).min(axis=1) / ds.n
    labels = ds.curve_labels()
    blocks = iter_similarity_rows(ds, method, None if not method.is_local else t, block_rows)
    mode = "wb" if fmt == "binary" else "w"
    with Path(path).open(mode, **({} if fmt == "binary" else {"newline": "", "encoding": "utf-8"})) as fh:
        writer = None
        if fmt == "binary":
            fh.write(_header(ds.n))
        else:
            writer = csv.writer(fh)
            writer.writerow(["label", *labels])
        for start, block in blocks:
            if diag is not None:
                block = _gower(diag[start : start + block.shape[0]], diag, block)
            if writer is None:
                fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())
            else:
                for r, row in enumerate(block):
                    writer.writerow([labels[start + r], *(repr(float(v)) for v in row)])
