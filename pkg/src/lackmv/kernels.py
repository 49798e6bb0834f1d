"""Hot loops of the solver, in two interchangeable flavours.

All kernels take sample-major data: ``rows`` has shape (n, m) with one sample
per row, and centroids are passed as ``cents`` with shape (c, m).  Assignment
vectors use -1 for "not assigned yet"; those samples are skipped.

The ``*_numba`` and ``*_numpy`` variants are both importable so they can be
compared directly; the unsuffixed names dispatch on :data:`BACKEND`.
"""
import numpy as np

from ._backend import BACKEND, njit

__all__ = [
    "BACKEND",
    "sq_dist_table",
    "class_sums",
    "sq_residual",
    "weighted_argmin",
]


@njit(cache=True)
def sq_dist_table_numba(rows, cents):
    n, m = rows.shape
    c = cents.shape[0]
    out = np.empty((n, c))
    for i in range(n):
        for k in range(c):
            s = 0.0
            for r in range(m):
                diff = rows[i, r] - cents[k, r]
                s += diff * diff
            out[i, k] = s
    return out


def sq_dist_table_numpy(rows, cents):
    out = np.empty((rows.shape[0], cents.shape[0]))
    for k in range(cents.shape[0]):
        diff = rows - cents[k]
        out[:, k] = np.einsum("ij,ij->i", diff, diff)
    return out


@njit(cache=True)
def class_sums_numba(rows, assign, c):
    n, m = rows.shape
    sums = np.zeros((c, m))
    counts = np.zeros(c, dtype=np.int64)
    for i in range(n):
        k = assign[i]
        if k < 0:
            continue
        counts[k] += 1
        for r in range(m):
            sums[k, r] += rows[i, r]
    return sums, counts


def class_sums_numpy(rows, assign, c):
    mask = assign >= 0
    sums = np.zeros((c, rows.shape[1]))
    # add.at accumulates in sample order, same as the compiled loop
    np.add.at(sums, assign[mask], rows[mask])
    counts = np.bincount(assign[mask], minlength=c).astype(np.int64)
    return sums, counts


@njit(cache=True)
def sq_residual_numba(rows, cents, assign):
    n, m = rows.shape
    total = 0.0
    for i in range(n):
        k = assign[i]
        if k < 0:
            continue
        for r in range(m):
            diff = rows[i, r] - cents[k, r]
            total += diff * diff
    return total


def sq_residual_numpy(rows, cents, assign):
    mask = assign >= 0
    diff = rows[mask] - cents[assign[mask]]
    return float(np.einsum("ij,ij->", diff, diff))


@njit(cache=True)
def weighted_argmin_numba(tables, weights):
    p_count, n, c = tables.shape
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = np.inf
        best_k = 0
        for k in range(c):
            s = 0.0
            for p in range(p_count):
                s += weights[p] * tables[p, i, k]
            # strict < keeps the lowest index on ties
            if s < best:
                best = s
                best_k = k
        out[i] = best_k
    return out


def weighted_argmin_numpy(tables, weights):
    total = np.zeros(tables.shape[1:])
    for p in range(tables.shape[0]):
        total += weights[p] * tables[p]
    return np.argmin(total, axis=1).astype(np.int64)


if BACKEND == "numba":
    sq_dist_table = sq_dist_table_numba
    class_sums = class_sums_numba
    sq_residual = sq_residual_numba
    weighted_argmin = weighted_argmin_numba
else:
    sq_dist_table = sq_dist_table_numpy
    class_sums = class_sums_numpy
    sq_residual = sq_residual_numpy
    weighted_argmin = weighted_argmin_numpy
