"""Hot loops: rank extraction for Monte Carlo runs and nested-pair counting.

Each kernel has a numba implementation and a numpy implementation with
identical outputs. The public names at the bottom pick one according to
``sigkit._accel.USE_NUMBA``; both variants stay importable for testing and
benchmarking.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


def popcounts(n):
    """Cardinality of every subset mask of ``[n]`` as an int64 array."""
    masks = np.arange(1 << n, dtype=np.int64)
    pc = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        pc += (masks >> i) & 1
    return pc


# --------------------------------------------------------------------------
# failure ranks


def system_ranks_numpy(tables, samples):
    """Failure rank of each system on each lifetime vector.

    Parameters
    ----------
    tables : (m, 2**n) uint8 array
        Truth tables, one row per system.
    samples : (N, n) float64 array
        Lifetime vectors without ties.

    Returns
    -------
    (N, m) int64 array
        ``ranks[r, i] = k`` when system ``i`` dies at the ``k``-th component
        failure of sample ``r`` (1-based).
    """
    tables = np.asarray(tables, dtype=np.uint8)
    samples = np.asarray(samples, dtype=np.float64)
    N, n = samples.shape
    full = (1 << n) - 1
    order = np.argsort(samples, axis=1, kind="stable")
    dead = np.bitwise_or.accumulate(np.left_shift(1, order, dtype=np.int64), axis=1)
    alive = full ^ dead
    out = np.empty((N, tables.shape[0]), dtype=np.int64)
    for i in range(tables.shape[0]):
        out[:, i] = np.argmax(tables[i][alive] == 0, axis=1) + 1
    return out


@njit(cache=True, nogil=True)
def system_ranks_numba(tables, samples):
    N, n = samples.shape
    m = tables.shape[0]
    full = (1 << n) - 1
    out = np.empty((N, m), dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    for r in range(N):
        row = samples[r]
        # insertion sort of component indices; n is small
        for j in range(n):
            v = row[j]
            i = j
            while i > 0 and row[order[i - 1]] > v:
                order[i] = order[i - 1]
                i -= 1
            order[i] = j
        for i in range(m):
            alive = full
            for j in range(n):
                alive ^= 1 << order[j]
                if tables[i, alive] == 0:
                    out[r, i] = j + 1
                    break
    return out


# --------------------------------------------------------------------------
# nested pair counts


def nested_pair_counts_numpy(outer, inner, n):
    """Count nested pairs of true sets, grouped by cardinality.

    Returns an (n+1, n+1) int64 matrix ``M`` with
    ``M[a, b] = #{(A, B) : B <= A, |A| = a, |B| = b, outer(A) = inner(B) = 1}``.
    """
    outer = np.asarray(outer, dtype=np.uint8)
    inner = np.asarray(inner, dtype=np.uint8)
    size = 1 << n
    pc = popcounts(n)
    by_size = np.argsort(pc, kind="stable")
    starts = np.searchsorted(pc[by_size], np.arange(n + 1))
    keep = outer[by_size].astype(np.int64)
    M = np.zeros((n + 1, n + 1), dtype=np.int64)
    for b in range(n + 1):
        f = ((inner == 1) & (pc == b)).astype(np.int64)
        if not f.any():
            continue
        # subset-sum (zeta) transform: f[A] = #{B <= A : inner(B), |B| = b}
        for i in range(n):
            view = f.reshape(size >> (i + 1), 2, 1 << i)
            view[:, 1, :] += view[:, 0, :]
        M[:, b] = np.add.reduceat(f[by_size] * keep, starts)
    return M


@njit(cache=True, nogil=True)
def nested_pair_counts_numba(outer, inner, n):
    size = 1 << n
    pc = np.zeros(size, dtype=np.int64)
    for mask in range(1, size):
        pc[mask] = pc[mask >> 1] + (mask & 1)
    M = np.zeros((n + 1, n + 1), dtype=np.int64)
    f = np.empty(size, dtype=np.int64)
    for b in range(n + 1):
        any_true = False
        for mask in range(size):
            if inner[mask] == 1 and pc[mask] == b:
                f[mask] = 1
                any_true = True
            else:
                f[mask] = 0
        if not any_true:
            continue
        for i in range(n):
            bit = 1 << i
            for mask in range(size):
                if mask & bit:
                    f[mask] += f[mask ^ bit]
        for mask in range(size):
            if outer[mask] == 1:
                M[pc[mask], b] += f[mask]
    return M


# below this many components the numpy transform finishes before numba would
# even have compiled
NUMBA_MIN_N = 14

system_ranks = system_ranks_numba if USE_NUMBA else system_ranks_numpy


def nested_pair_counts(outer, inner, n):
    if USE_NUMBA and n >= NUMBA_MIN_N:
        return nested_pair_counts_numba(outer, inner, n)
    return nested_pair_counts_numpy(outer, inner, n)
