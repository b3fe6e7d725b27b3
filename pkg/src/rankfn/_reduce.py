"""Compiled Z/2 column reduction on sorted integer columns."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _xor_sorted(a, na, b, out):
    """Symmetric difference of sorted ``a[:na]`` and ``b`` into ``out``; returns length."""
    i = 0
    j = 0
    k = 0
    nb = b.shape[0]
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x < y:
            out[k] = x
            i += 1
            k += 1
        elif y < x:
            out[k] = y
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def reduce_columns(indptr, rows, skip, nrows):
    """Reduce CSR columns whose pivot is their smallest row.

    Columns are processed in CSR order; each column's rows must be sorted
    ascending. Returns ``(cols, lows)``, the column numbers that end with a
    pivot and those pivots.
    """
    ncols = indptr.shape[0] - 1
    owner = np.full(nrows, -1, dtype=np.int64)
    start = np.zeros(ncols, dtype=np.int64)
    length = np.zeros(ncols, dtype=np.int64)
    pool = np.empty(max(16, rows.shape[0]), dtype=np.int64)
    used = 0
    cols = np.empty(ncols, dtype=np.int64)
    lows = np.empty(ncols, dtype=np.int64)
    npairs = 0
    buf = np.empty(16, dtype=np.int64)
    tmp = np.empty(16, dtype=np.int64)
    for c in range(ncols):
        if skip[c]:
            continue
        a = indptr[c]
        b = indptr[c + 1]
        n = b - a
        if n == 0:
            continue
        if buf.shape[0] < n:
            buf = np.empty(2 * n, dtype=np.int64)
        buf[:n] = rows[a:b]
        while n > 0:
            k = owner[buf[0]]
            if k < 0:
                break
            other = pool[start[k]:start[k] + length[k]]
            need = n + other.shape[0]
            if tmp.shape[0] < need:
                tmp = np.empty(2 * need, dtype=np.int64)
            n = _xor_sorted(buf, n, other, tmp)
            buf, tmp = tmp, buf
        if n == 0:
            continue
        if used + n > pool.shape[0]:
            grown = np.empty(max(2 * pool.shape[0], used + n), dtype=np.int64)
            grown[:used] = pool[:used]
            pool = grown
        pool[used:used + n] = buf[:n]
        start[c] = used
        length[c] = n
        used += n
        owner[buf[0]] = c
        cols[npairs] = c
        lows[npairs] = buf[0]
        npairs += 1
    return cols[:npairs], lows[:npairs]
