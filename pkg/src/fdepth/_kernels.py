"""Compiled inner loops.

Every depth and similarity in the package reduces to two per-curve tests
against a lower center ``lo`` and an upper center ``hi`` (equal to the
query curve for depths, to the pointwise min/max of a pair for
similarities):

* slab containment, counted over curves (half-region family);
* time spent in a slab, gated by a band indicator (modified family).

For a pair the slabs are the intersections of the two curves' own slabs:
``[hi - tau, lo]`` below and ``[hi, lo + tau]`` above, with the band
``[hi - tau, lo + tau]``.  With ``lo == hi`` these are the depth slabs.

A global depth is the same computation with ``tau = inf``.  Comparisons are
written on differences (``hi - y <= tau``) rather than shifted centers
(``y >= hi - tau``) so that ``tau`` equal to the data range saturates the
slabs exactly in floating point.

The modified family accumulates integer counts per grid point and applies
the grid weights once at the end.  Results are therefore independent of the
order in which curves are visited, which keeps pruned pair computations,
full scans and any thread count bit-identical.
"""

import os

import numba as nb
import numpy as np

# numba probes TBB first and warns when the system copy is too old; OpenMP or
# its own work queue is all we need, so try those first unless overridden
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_JIT = dict(nogil=True, cache=True)


@nb.njit(**_JIT)
def _in_hyp(row, lo, hi, tau):
    # hi - tau <= y <= lo: the lower slabs of both centers at once
    for k in range(row.shape[0]):
        v = row[k]
        if v > lo[k] or hi[k] - v > tau[k]:
            return False
    return True


@nb.njit(**_JIT)
def _in_epi(row, lo, hi, tau):
    # hi <= y <= lo + tau
    for k in range(row.shape[0]):
        v = row[k]
        if v < hi[k] or v - lo[k] > tau[k]:
            return False
    return True


@nb.njit(**_JIT)
def _in_band(row, lo, hi, tau):
    # hi - tau <= y <= lo + tau at every grid point
    for k in range(row.shape[0]):
        v = row[k]
        if hi[k] - v > tau[k] or v - lo[k] > tau[k]:
            return False
    return True


@nb.njit(**_JIT)
def _count_sides(row, lo, hi, up, down):
    # inside the band, y >= hi implies y - hi <= tau and y <= lo implies
    # lo - y <= tau, so the slab tests reduce to sign tests
    for k in range(row.shape[0]):
        v = row[k]
        up[k] += v >= hi[k]
        down[k] += v <= lo[k]


@nb.njit(**_JIT)
def _weighted_mean(weights, counts, n):
    s = 0.0
    for k in range(weights.shape[0]):
        s += weights[k] * counts[k]
    return s / n


@nb.njit(**_JIT)
def _slab_counts(curves, lo, hi, tau):
    n, p = curves.shape
    n_hyp = 0
    n_epi = 0
    for i in range(n):
        in_hyp = True
        in_epi = True
        for k in range(p):
            v = curves[i, k]
            if in_hyp and (v > lo[k] or hi[k] - v > tau[k]):
                in_hyp = False
            if in_epi and (v < hi[k] or v - lo[k] > tau[k]):
                in_epi = False
            if not (in_hyp or in_epi):
                break
        if in_hyp:
            n_hyp += 1
        if in_epi:
            n_epi += 1
    return n_hyp, n_epi


@nb.njit(**_JIT)
def _band_lengths(curves, weights, lo, hi, tau):
    n, p = curves.shape
    up = np.zeros(p, dtype=np.int64)
    down = np.zeros(p, dtype=np.int64)
    for i in range(n):
        if _in_band(curves[i], lo, hi, tau):
            _count_sides(curves[i], lo, hi, up, down)
    return _weighted_mean(weights, up, n), _weighted_mean(weights, down, n)


@nb.njit(parallel=True, **_JIT)
def slab_counts_batch(curves, queries, tau):
    m = queries.shape[0]
    out = np.empty((m, 2), dtype=np.int64)
    for j in nb.prange(m):
        a, b = _slab_counts(curves, queries[j], queries[j], tau)
        out[j, 0] = a
        out[j, 1] = b
    return out


@nb.njit(parallel=True, **_JIT)
def band_lengths_batch(curves, weights, queries, tau):
    m = queries.shape[0]
    out = np.empty((m, 2))
    for j in nb.prange(m):
        a, b = _band_lengths(curves, weights, queries[j], queries[j], tau)
        out[j, 0] = a
        out[j, 1] = b
    return out


@nb.njit(**_JIT)
def slab_counts_pair(curves, lo, hi, tau):
    return _slab_counts(curves, lo, hi, tau)


@nb.njit(**_JIT)
def band_lengths_pair(curves, weights, lo, hi, tau):
    return _band_lengths(curves, weights, lo, hi, tau)


@nb.njit(**_JIT)
def _related(a, b, kind, tau):
    # kind 0: a within tau of b everywhere; 1: a <= b everywhere; 2: a >= b
    for k in range(a.shape[0]):
        if kind == 0:
            if b[k] - a[k] > tau[k] or a[k] - b[k] > tau[k]:
                return False
        elif kind == 1:
            if a[k] > b[k]:
                return False
        elif a[k] < b[k]:
            return False
    return True


@nb.njit(parallel=True, **_JIT)
def relation_lists(curves, kind, tau):
    """CSR lists: for each curve ``i`` the curves ``l`` related to it.

    ``kind`` 0 collects curves within ``tau`` of ``i`` at every grid point,
    1 the curves lying entirely below ``i``, 2 those entirely above.  A curve
    in the band (resp. lower, upper slab) of a pair envelope is related to
    both members of the pair, so intersecting two lists prunes the scan
    without changing any count.
    """
    n = curves.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for i in nb.prange(n):
        c = 0
        for l in range(n):
            if _related(curves[l], curves[i], kind, tau):
                c += 1
        counts[i] = c
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        indptr[i + 1] = indptr[i] + counts[i]
    indices = np.empty(indptr[n], dtype=np.int32)
    for i in nb.prange(n):
        pos = indptr[i]
        for l in range(n):
            if _related(curves[l], curves[i], kind, tau):
                indices[pos] = l
                pos += 1
    return indptr, indices


@nb.njit(**_JIT)
def _intersect(a, b, out):
    # both inputs sorted ascending
    i = 0
    j = 0
    m = 0
    while i < a.shape[0] and j < b.shape[0]:
        if a[i] < b[j]:
            i += 1
        elif a[i] > b[j]:
            j += 1
        else:
            out[m] = a[i]
            m += 1
            i += 1
            j += 1
    return m


@nb.njit(**_JIT)
def _envelope_into(x, y, lo, hi):
    for k in range(x.shape[0]):
        if x[k] <= y[k]:
            lo[k] = x[k]
            hi[k] = y[k]
        else:
            lo[k] = y[k]
            hi[k] = x[k]


@nb.njit(**_JIT)
def _candidates(indptr, indices, i, j, out):
    return _intersect(indices[indptr[i] : indptr[i + 1]], indices[indptr[j] : indptr[j + 1]], out)


@nb.njit(parallel=True, **_JIT)
def similarity_rows(curves, weights, tau, row_start, row_stop, col_start, mode, lists, n_ge, n_le):
    """Similarities of rows ``row_start:row_stop`` against columns ``col_start:``.

    With ``col_start < 0`` every row ``i`` is evaluated only for ``j >= i``
    (upper triangle) and the rest of the block is left at zero.

    ``mode`` 0: half-region family, ``lists`` is
    ``(below_ptr, below_idx, above_ptr, above_idx)`` from
    :func:`relation_lists`.  Mode 1: modified family with finite ``tau``,
    ``lists`` holds the band lists twice.  Mode 2: modified family without
    a band, using the per-grid-point counts ``n_ge``/``n_le`` from
    :func:`rank_counts`.
    """
    n, p = curves.shape
    rows = row_stop - row_start
    out = np.zeros((rows, n))
    for r in nb.prange(rows):
        i = row_start + r
        lo = np.empty(p)
        hi = np.empty(p)
        up = np.empty(p, dtype=np.int64)
        down = np.empty(p, dtype=np.int64)
        common = np.empty(n, dtype=np.int32)
        j0 = i if col_start < 0 else col_start
        for j in range(j0, n):
            if mode == 2:
                for k in range(p):
                    if curves[i, k] >= curves[j, k]:
                        up[k] = n_ge[i, k]
                        down[k] = n_le[j, k]
                    else:
                        up[k] = n_ge[j, k]
                        down[k] = n_le[i, k]
                out[r, j] = min(_weighted_mean(weights, up, n), _weighted_mean(weights, down, n))
                continue
            _envelope_into(curves[i], curves[j], lo, hi)
            if mode == 1:
                m = _candidates(lists[0], lists[1], i, j, common)
                up[:] = 0
                down[:] = 0
                for c in range(m):
                    row = curves[common[c]]
                    if _in_band(row, lo, hi, tau):
                        _count_sides(row, lo, hi, up, down)
                el = _weighted_mean(weights, up, n)
                hl = _weighted_mean(weights, down, n)
                out[r, j] = min(el, hl)
            else:
                m = _candidates(lists[0], lists[1], i, j, common)
                a = 0
                for c in range(m):
                    if _in_hyp(curves[common[c]], lo, hi, tau):
                        a += 1
                m = _candidates(lists[2], lists[3], i, j, common)
                b = 0
                for c in range(m):
                    if _in_epi(curves[common[c]], lo, hi, tau):
                        b += 1
                out[r, j] = min(a, b) / n
    return out


def rank_counts(curves):
    """Per grid point, how many curves lie at or above / at or below each value."""
    n = curves.shape[0]
    cols = np.sort(curves, axis=0)
    n_ge = np.empty(curves.shape, dtype=np.int64)
    n_le = np.empty(curves.shape, dtype=np.int64)
    for k in range(curves.shape[1]):
        n_ge[:, k] = n - np.searchsorted(cols[:, k], curves[:, k], side="left")
        n_le[:, k] = np.searchsorted(cols[:, k], curves[:, k], side="right")
    return n_ge, n_le


@nb.njit(parallel=True, **_JIT)
def pairwise_sup(curves):
    n, p = curves.shape
    out = np.empty(n * (n - 1) // 2)
    for i in nb.prange(n - 1):
        base = i * n - i * (i + 1) // 2
        for j in range(i + 1, n):
            m = 0.0
            for k in range(p):
                d = abs(curves[i, k] - curves[j, k])
                if d > m:
                    m = d
            out[base + j - i - 1] = m
    return out
