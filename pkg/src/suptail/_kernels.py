"""Hot integer kernels, compiled with numba when available.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with the same signature and bit-identical results.  The module-level
names (``sup_hits``, ``enum_hit_weight``, ``count_subsets_ge``,
``max_traces``) are bound to one implementation at import time; set
``SUPTAIL_DISABLE_NUMBA=1`` to force the numpy path.

All inputs are integer-scaled (int64) so that comparisons are exact.  The
callers in the public modules are responsible for scaling and for checking
that no intermediate can overflow.
"""
from __future__ import annotations

from itertools import combinations, islice

import numpy as np

from ._config import use_numba

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_CHUNK = 1 << 14


# ---------------------------------------------------------------------------
# numpy reference path
# ---------------------------------------------------------------------------

def sup_hits_numpy(values, idx, thr, strict):
    """Count rows b of ``idx`` with max_r sum_l values[r, idx[b, l]] above ``thr``."""
    hits = 0
    for start in range(0, idx.shape[0], _CHUNK):
        block = idx[start:start + _CHUNK]
        sums = values[:, block].sum(axis=2)
        best = sums.max(axis=0)
        hits += int(np.count_nonzero(best > thr if strict else best >= thr))
    return hits


def enum_hit_weight_numpy(values, weights, n, thr, strict):
    """Sum of prod_l weights[x_l] over all x in range(N)**n whose sup sum hits."""
    n_points = values.shape[1]
    total_seq = n_points ** n
    powers = n_points ** np.arange(n - 1, -1, -1, dtype=np.int64)
    acc = 0
    for start in range(0, total_seq, _CHUNK):
        seq = np.arange(start, min(start + _CHUNK, total_seq), dtype=np.int64)
        idx = (seq[:, None] // powers[None, :]) % n_points
        best = values[:, idx].sum(axis=2).max(axis=0)
        mask = best > thr if strict else best >= thr
        if mask.any():
            acc += int(weights[idx[mask]].prod(axis=1).sum())
    return acc


def count_subsets_ge_numpy(values, k, thr):
    """Number of k-subsets Y of the columns with max_r sum_{i in Y} values[r, i] >= thr."""
    m = values.shape[1]
    if k == 0:
        return int(values.shape[0] > 0 and 0 >= thr)
    it = combinations(range(m), k)
    count = 0
    while True:
        flat = np.fromiter(
            (i for combo in islice(it, _CHUNK) for i in combo), dtype=np.int64
        )
        if flat.size == 0:
            break
        block = flat.reshape(-1, k)
        best = values[:, block].sum(axis=2).max(axis=0)
        count += int(np.count_nonzero(best >= thr))
    return count


def max_traces_numpy(masks, ground, n):
    """Max over n-subsets S of range(ground) of the number of distinct masks & S."""
    best = 0
    for combo in combinations(range(ground), n):
        sub = 0
        for i in combo:
            sub |= 1 << i
        traces = np.unique(masks & np.int64(sub)).size
        if traces > best:
            best = traces
    return best


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def sup_hits_numba(values, idx, thr, strict):
        n_rows = values.shape[0]
        hits = 0
        for b in range(idx.shape[0]):
            best = np.int64(-1) << 62
            for r in range(n_rows):
                s = np.int64(0)
                for l in range(idx.shape[1]):
                    s += values[r, idx[b, l]]
                if s > best:
                    best = s
            if strict:
                if best > thr:
                    hits += 1
            elif best >= thr:
                hits += 1
        return hits

    @njit(cache=True, nogil=True)
    def enum_hit_weight_numba(values, weights, n, thr, strict):
        n_rows, n_points = values.shape
        # prefix sums/products indexed by sequence position
        psum = np.zeros((n + 1, n_rows), dtype=np.int64)
        pw = np.ones(n + 1, dtype=np.int64)
        digits = np.zeros(n, dtype=np.int64)
        for pos in range(n):
            for r in range(n_rows):
                psum[pos + 1, r] = psum[pos, r] + values[r, 0]
            pw[pos + 1] = pw[pos] * weights[0]
        acc = np.int64(0)
        while True:
            best = psum[n, 0]
            for r in range(1, n_rows):
                if psum[n, r] > best:
                    best = psum[n, r]
            if strict:
                if best > thr:
                    acc += pw[n]
            elif best >= thr:
                acc += pw[n]
            pos = n - 1
            while pos >= 0 and digits[pos] == n_points - 1:
                digits[pos] = 0
                pos -= 1
            if pos < 0:
                break
            digits[pos] += 1
            for q in range(pos, n):
                d = digits[q]
                for r in range(n_rows):
                    psum[q + 1, r] = psum[q, r] + values[r, d]
                pw[q + 1] = pw[q] * weights[d]
        return acc

    @njit(cache=True, nogil=True)
    def count_subsets_ge_numba(values, k, thr):
        n_rows, m = values.shape
        if k == 0:
            return 1 if (n_rows > 0 and 0 >= thr) else 0
        if k > m:
            return 0
        combo = np.arange(k).astype(np.int64)
        psum = np.zeros((k + 1, n_rows), dtype=np.int64)
        for pos in range(k):
            for r in range(n_rows):
                psum[pos + 1, r] = psum[pos, r] + values[r, combo[pos]]
        count = 0
        while True:
            best = psum[k, 0]
            for r in range(1, n_rows):
                if psum[k, r] > best:
                    best = psum[k, r]
            if best >= thr:
                count += 1
            pos = k - 1
            while pos >= 0 and combo[pos] == m - k + pos:
                pos -= 1
            if pos < 0:
                break
            combo[pos] += 1
            for q in range(pos + 1, k):
                combo[q] = combo[q - 1] + 1
            for q in range(pos, k):
                for r in range(n_rows):
                    psum[q + 1, r] = psum[q, r] + values[r, combo[q]]
        return count

    @njit(cache=True, nogil=True)
    def max_traces_numba(masks, ground, n):
        if n == 0:
            return 1 if masks.size > 0 else 0
        if n > ground:
            return 0
        sub = (np.int64(1) << n) - 1
        limit = np.int64(1) << ground
        best = 0
        traces = np.empty(masks.size, dtype=np.int64)
        while sub < limit:
            for i in range(masks.size):
                traces[i] = masks[i] & sub
            traces.sort()
            distinct = 1 if masks.size > 0 else 0
            for i in range(1, masks.size):
                if traces[i] != traces[i - 1]:
                    distinct += 1
            if distinct > best:
                best = distinct
            # Gosper's hack: next integer with the same popcount
            c = sub & -sub
            r = sub + c
            sub = (((r ^ sub) >> 2) // c) | r
        return best

    NUMBA_KERNELS = {
        "sup_hits": sup_hits_numba,
        "enum_hit_weight": enum_hit_weight_numba,
        "count_subsets_ge": count_subsets_ge_numba,
        "max_traces": max_traces_numba,
    }
else:  # pragma: no cover
    NUMBA_KERNELS = {}

NUMPY_KERNELS = {
    "sup_hits": sup_hits_numpy,
    "enum_hit_weight": enum_hit_weight_numpy,
    "count_subsets_ge": count_subsets_ge_numpy,
    "max_traces": max_traces_numpy,
}

ACTIVE_BACKEND = "numba" if (HAVE_NUMBA and use_numba()) else "numpy"
_ACTIVE = NUMBA_KERNELS if ACTIVE_BACKEND == "numba" else NUMPY_KERNELS

sup_hits = _ACTIVE["sup_hits"]
enum_hit_weight = _ACTIVE["enum_hit_weight"]
count_subsets_ge = _ACTIVE["count_subsets_ge"]
max_traces = _ACTIVE["max_traces"]
