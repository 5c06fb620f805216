"""Jitted hot loops for the accessible-path counters.

The kernels replay exactly the arithmetic of the pure-numpy engines in
exact.py (same 64-bit mixing, same float conversion, same comparisons), one
seed at a time in cache-resident arrays.  They exist purely for throughput;
every result is interchangeable with the numpy route and the test suite
asserts exact equality between the two.  When numba is unavailable the
package falls back to the numpy engines transparently.
"""

from __future__ import annotations

import numpy as np

try:
    import warnings

    import numba
    from numba import NumbaWarning, njit, prange

    warnings.filterwarnings("ignore", category=NumbaWarning)
    HAVE_NUMBA = True

    def set_worker_threads(n: int) -> None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))

except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range

    def set_worker_threads(n: int) -> None:
        pass

_SALT = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U1 = np.uint64(1)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TO_UNIT = 2.0**-53


@njit(cache=True, inline="always")
def _mix64(x):
    x ^= x >> _S30
    x *= _M1
    x ^= x >> _S27
    x *= _M2
    x ^= x >> _S31
    return x


@njit(cache=True)
def _frontier_one(state, n, bits, w, nbits, nw):
    """One level-synchronous sweep; returns the accessible count or -1 on overflow."""
    cap = bits.shape[0]
    bits[0] = np.uint64(0)
    w[0] = -1.0
    m = 1
    for _level in range(n):
        mn = 0
        for t in range(m):
            b = bits[t]
            stage = _mix64(state ^ b)
            lw = w[t]
            for d in range(n):
                du = np.uint64(d)
                if (b >> du) & _U1 == np.uint64(0):
                    h = _mix64(stage ^ np.uint64(d + 1))
                    wt = ((h >> _S11) + 0.5) * _TO_UNIT
                    if wt > lw:
                        if mn >= cap:
                            return -1
                        nbits[mn] = b | (_U1 << du)
                        nw[mn] = wt
                        mn += 1
        bits, nbits = nbits, bits
        w, nw = nw, w
        m = mn
    return m


@njit(cache=True, parallel=True)
def _count_many(seeds, n, cap):
    out = np.empty(seeds.shape[0], dtype=np.int64)
    for i in prange(seeds.shape[0]):
        bits = np.empty(cap, dtype=np.uint64)
        w = np.empty(cap, dtype=np.float64)
        nbits = np.empty(cap, dtype=np.uint64)
        nw = np.empty(cap, dtype=np.float64)
        out[i] = _frontier_one(_mix64(seeds[i] ^ _SALT), n, bits, w, nbits, nw)
    return out


@njit(cache=True)
def _trail_one(state, n, cap_level, cap_total):
    """Frontier sweep for one seed keeping the parent trail.

    Returns (count, offsets, parents, dirs) where level k of the trail lives
    in parents/dirs[offsets[k]:offsets[k+1]]; count is -1 on capacity overflow.
    """
    bits = np.empty(cap_level, dtype=np.uint64)
    w = np.empty(cap_level, dtype=np.float64)
    nbits = np.empty(cap_level, dtype=np.uint64)
    nw = np.empty(cap_level, dtype=np.float64)
    parents = np.empty(cap_total, dtype=np.int64)
    dirs = np.empty(cap_total, dtype=np.int8)
    offsets = np.zeros(n + 1, dtype=np.int64)
    bits[0] = np.uint64(0)
    w[0] = -1.0
    m = 1
    total = 0
    for level in range(n):
        mn = 0
        for t in range(m):
            b = bits[t]
            stage = _mix64(state ^ b)
            lw = w[t]
            for d in range(n):
                du = np.uint64(d)
                if (b >> du) & _U1 == np.uint64(0):
                    h = _mix64(stage ^ np.uint64(d + 1))
                    wt = ((h >> _S11) + 0.5) * _TO_UNIT
                    if wt > lw:
                        if mn >= cap_level or total + mn >= cap_total:
                            return -1, offsets, parents, dirs
                        nbits[mn] = b | (_U1 << du)
                        nw[mn] = wt
                        parents[total + mn] = t
                        dirs[total + mn] = d + 1
                        mn += 1
        bits, nbits = nbits, bits
        w, nw = nw, w
        total += mn
        offsets[level + 1] = total
        m = mn
    return m, offsets, parents, dirs


def count_many(seeds: np.ndarray, n: int, cap: int) -> np.ndarray:
    """Counts for many seeds; lanes returning -1 must be retried with more room."""
    return _count_many(np.ascontiguousarray(seeds, dtype=np.uint64), n, cap)


def trail_one(seed: int, n: int, cap_level: int, cap_total: int):
    # numba boxes uint64 returns as Python ints; re-wrap before dispatching.
    state = np.uint64(_mix64(np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF) ^ _SALT))
    return _trail_one(state, n, cap_level, cap_total)
