"""Exact counting of accessible bottom-to-top paths.

Three independent evaluation routes are kept side by side:

* a dense subset dynamic program over (subset, last direction) tables,
  vectorized across a batch of seeds (dimensions up to 20);
* a sparse frontier sweep that expands every increasing partial path level by
  level, used for single counts in dimensions 21..24 where the dense tables
  no longer fit, and as the campaign engine (its expected size is 2^n rather
  than the table's n * 2^n entries);
* literal enumeration of all n! permutations (dimensions up to 10), the
  testing oracle.

All routes are exact integer counts of the same quantity and are
cross-checked in the test suite.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels
from .core import (
    DirectPath,
    GapEncoding,
    WeightOracle,
    _S11,
    _U64,
    mix64_array,
    seed_state,
)

MAX_N = 24
MAX_DENSE_N = 20
MAX_BRUTEFORCE_N = 10
LIST_GUARD = 10**6
_FRONTIER_CAP = 50_000_000
_PAIR_CHUNK = 2048
_COUNT_GUARD = float(1 << 52)  # dense counts live in float64; stay exact


@lru_cache(maxsize=8)
def _level_structure(n: int):
    """Per-level subset tables and parent->child transition indices.

    For each level k: the sorted bitmask array of k-subsets, and for the
    transition to level k+1 the flat pair arrays (parent index, direction,
    child index).  Seed independent, cached per dimension.
    """
    subsets = [np.zeros(1, dtype=np.uint64)]
    for k in range(1, n + 1):
        combos = itertools.combinations(range(n), k)
        masks = np.fromiter((sum(1 << c for c in cb) for cb in combos), dtype=np.uint64, count=math.comb(n, k))
        masks.sort()
        subsets.append(masks)
    transitions = []
    for k in range(n):
        cur, nxt = subsets[k], subsets[k + 1]
        parents, dirs = [], []
        for d in range(n):
            bit = _U64(1 << d)
            have = (cur & bit).astype(bool)
            idx = np.nonzero(~have)[0]
            parents.append(idx.astype(np.int64))
            dirs.append(np.full(idx.shape, d + 1, dtype=np.int64))
        parent = np.concatenate(parents)
        direction = np.concatenate(dirs)
        child_bits = subsets[k][parent] | (_U64(1) << (direction - 1).astype(np.uint64))
        child = np.searchsorted(nxt, child_bits).astype(np.int64)
        transitions.append((parent, direction, child))
    return subsets, transitions


def _edge_weights(state_b: np.ndarray, lower_bits: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """Weights of edges (lower_bits[t], direction[t]) for each seed state, (T, B)."""
    m2 = mix64_array(state_b[None, :] ^ lower_bits[:, None])
    h = mix64_array(m2 ^ direction[:, None].astype(np.uint64))
    return ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53


def count_accessible_batch(n: int, seeds, stash: bool = False):
    """Dense DP over all seeds at once; returns int64 counts of shape (B,).

    With stash=True additionally returns the per-level (subsets, cnt, inW)
    tables needed to backtrack individual accessible paths.
    """
    if not 1 <= n <= MAX_DENSE_N:
        raise ValueError(f"dense DP supports 1 <= n <= {MAX_DENSE_N}, got {n}")
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    B = seeds.shape[0]
    state = seed_state(seeds)
    subsets, transitions = _level_structure(n)

    # Level 1: count({d}, d) = 1, entry weight W(empty set -> {d}).
    cnt = np.zeros((n, n, B))
    inw = np.zeros((n, n, B))
    w0 = _edge_weights(state, np.zeros(n, dtype=np.uint64), np.arange(1, n + 1, dtype=np.int64))
    order = np.searchsorted(subsets[1], np.uint64(1) << np.arange(n, dtype=np.uint64))
    cnt[order, np.arange(n)] = 1.0
    inw[order, np.arange(n)] = w0
    tables = [(subsets[1], cnt, inw)] if stash else None

    for k in range(1, n):
        parent, direction, child = transitions[k]
        m_next = subsets[k + 1].shape[0]
        cnt_next = np.zeros((m_next, n, B))
        inw_next = np.zeros((m_next, n, B))
        lower = subsets[k]
        for lo in range(0, parent.shape[0], _PAIR_CHUNK):
            sl = slice(lo, lo + _PAIR_CHUNK)
            p, d, c = parent[sl], direction[sl], child[sl]
            w_out = _edge_weights(state, lower[p], d)
            rows_cnt = cnt[p]
            rows_w = inw[p]
            vals = np.einsum("tjb,tjb->tb", rows_cnt, rows_w < w_out[:, None, :])
            cnt_next[c, d - 1] = vals
            inw_next[c, d - 1] = w_out
        cnt, inw = cnt_next, inw_next
        if cnt.size and cnt.max() >= _COUNT_GUARD:
            raise OverflowError("path counts exceeded the exact float64 range")
        if stash:
            tables.append((subsets[k + 1], cnt, inw))

    totals = cnt.sum(axis=(0, 1)).round().astype(np.int64)
    return (totals, tables) if stash else totals


def _backtrack_paths(n: int, tables, col: int) -> list[DirectPath]:
    """Recover the accessible paths of one seed column from stashed DP tables."""
    out: list[tuple[int, ...]] = []

    def walk(level, s_idx, last, suffix):
        if len(out) >= LIST_GUARD:
            raise RuntimeError(f"more than {LIST_GUARD} accessible paths")
        if level == 1:
            out.append((last, *suffix))
            return
        _, cnt, inw = tables[level - 1]
        sub, cnt_prev, inw_prev = tables[level - 2]
        w_here = inw[s_idx, last - 1, col]
        bits = int(tables[level - 1][0][s_idx]) & ~(1 << (last - 1))
        p_idx = int(np.searchsorted(sub, np.uint64(bits)))
        for j in range(1, n + 1):
            if bits >> (j - 1) & 1 and cnt_prev[p_idx, j - 1, col] > 0 and inw_prev[p_idx, j - 1, col] < w_here:
                walk(level - 1, p_idx, j, (last, *suffix))

    _, cnt_top, _ = tables[n - 1]
    for i in range(1, n + 1):
        if cnt_top[0, i - 1, col] > 0:
            walk(n, 0, i, ())
    return [DirectPath.full(n, dirs) for dirs in sorted(out)]


def frontier_counts(n: int, seeds, keep_parents: bool = False, cap: int = _FRONTIER_CAP):
    """Count accessible paths by level-synchronous expansion of partial paths.

    Every frontier entry is one increasing partial path from the bottom
    vertex; expected total size is 2^n per seed.  With keep_parents=True the
    per-level parent/direction arrays are returned for path recovery.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"supported dimensions are 1 <= n <= {MAX_N}, got {n}")
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    B = seeds.shape[0]
    state = seed_state(seeds)

    bits = np.zeros(B, dtype=np.uint64)
    sidx = np.arange(B, dtype=np.int64)
    lastw = np.full(B, -1.0)
    dirs_u = np.arange(1, n + 1, dtype=np.uint64)
    dir_bits = (_U64(1) << np.arange(n, dtype=np.uint64))[None, :]
    row_chunk = max(1, 2**23 // n)
    trail = []  # per level: (parent position in previous frontier, direction)
    for _ in range(n):
        pieces = []
        stage = mix64_array(state[sidx] ^ bits)  # direction-independent mix
        for lo in range(0, bits.shape[0], row_chunk):
            sl = slice(lo, lo + row_chunk)
            h = mix64_array(stage[sl, None] ^ dirs_u[None, :])
            w = ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53
            free = (bits[sl, None] & dir_bits) == 0
            row, col = np.nonzero(free & (w > lastw[sl, None]))
            pieces.append((
                bits[sl][row] | dir_bits[0, col],
                sidx[sl][row],
                w[row, col],
                row + lo,
                (col + 1).astype(np.int8),
            ))
        bits = np.concatenate([p[0] for p in pieces]) if pieces else np.zeros(0, dtype=np.uint64)
        sidx = np.concatenate([p[1] for p in pieces]) if pieces else np.zeros(0, dtype=np.int64)
        lastw = np.concatenate([p[2] for p in pieces]) if pieces else np.zeros(0)
        if bits.shape[0] > cap:
            raise RuntimeError(f"frontier exceeded {cap} partial paths")
        if keep_parents:
            trail.append((
                np.concatenate([p[3] for p in pieces]) if pieces else np.zeros(0, dtype=np.int64),
                np.concatenate([p[4] for p in pieces]) if pieces else np.zeros(0, dtype=np.int8),
            ))

    counts = np.bincount(sidx, minlength=B).astype(np.int64)
    return (counts, sidx, trail) if keep_parents else counts


def _paths_from_trail(n: int, sidx, trail, want: int) -> list[DirectPath]:
    """Recover the full direction sequences ending at frontier entries of one seed."""
    out = []
    for t in np.nonzero(sidx == want)[0]:
        dirs = []
        pos = int(t)
        for level in range(n - 1, -1, -1):
            parents, ds = trail[level]
            dirs.append(int(ds[pos]))
            pos = int(parents[pos])
        out.append(tuple(reversed(dirs)))
    return [DirectPath.full(n, d) for d in sorted(out)]


def _level_cap(n: int) -> int:
    return 4 * math.comb(n, n // 2) + 64


def count_accessible_many(n: int, seeds) -> np.ndarray:
    """Counts for an array of seeds: the campaign engine.

    Uses the jitted per-seed frontier sweep when numba is present (retrying
    rare seeds whose frontier outgrows the initial capacity), the vectorized
    numpy sweep otherwise.  Results are identical either way.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"supported dimensions are 1 <= n <= {MAX_N}, got {n}")
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    if not _kernels.HAVE_NUMBA:
        return frontier_counts(n, seeds)
    cap = _level_cap(n)
    out = _kernels.count_many(seeds, n, cap)
    bad = np.nonzero(out < 0)[0]
    while bad.size:
        cap *= 4
        if cap > 16 * _FRONTIER_CAP:
            raise RuntimeError(f"frontier exceeded {_FRONTIER_CAP} partial paths")
        out[bad] = _kernels.count_many(seeds[bad], n, cap)
        bad = bad[out[bad] < 0]
    return out


def accessible_path_directions(n: int, seed: int) -> list[tuple[int, ...]]:
    """Direction tuples of every accessible path for one seed, sorted."""
    if not 1 <= n <= MAX_N:
        raise ValueError(f"supported dimensions are 1 <= n <= {MAX_N}, got {n}")
    if _kernels.HAVE_NUMBA:
        cap_level, cap_total = _level_cap(n), 4 * (1 << n) + 256
        while True:
            count, offsets, parents, dirs = _kernels.trail_one(seed, n, cap_level, cap_total)
            if count >= 0:
                break
            cap_level *= 4
            cap_total *= 4
            if cap_total > 16 * _FRONTIER_CAP:
                raise RuntimeError(f"frontier exceeded {_FRONTIER_CAP} partial paths")
        if count > LIST_GUARD:
            raise RuntimeError(f"more than {LIST_GUARD} accessible paths")
        out = []
        for t in range(count):
            seq = []
            pos = t
            for level in range(n - 1, -1, -1):
                base = offsets[level]
                seq.append(int(dirs[base + pos]))
                pos = int(parents[base + pos])
            out.append(tuple(reversed(seq)))
        return sorted(out)
    counts, sidx, trail = frontier_counts(n, [seed], keep_parents=True)
    if int(counts[0]) > LIST_GUARD:
        raise RuntimeError(f"more than {LIST_GUARD} accessible paths")
    return sorted(p.directions for p in _paths_from_trail(n, sidx, trail, 0))


def count_accessible(n: int, oracle: WeightOracle) -> int:
    """Exact number of accessible bottom-to-top paths for the realized weights.

    Dimensions up to 20 run the dense (subset, last direction) recursion
    count(S, i) = sum over j in S minus i of count(S minus i, j) times the
    indicator that the entry weights increase; 21..24 evaluate the same
    recursion sparsely, enumerating its nonzero support via the frontier
    sweep (the dense tables would need tens of gigabytes there).
    """
    _require_dim(n, oracle)
    if n <= MAX_DENSE_N and not _kernels.HAVE_NUMBA:
        return int(count_accessible_batch(n, [oracle.seed])[0])
    return int(count_accessible_many(n, [oracle.seed])[0])


def count_accessible_bruteforce(n: int, oracle: WeightOracle) -> int:
    """Testing oracle: try all n! permutations and count the increasing ones."""
    if not 1 <= n <= MAX_BRUTEFORCE_N:
        raise ValueError(f"brute force supports 1 <= n <= {MAX_BRUTEFORCE_N}, got {n}")
    _require_dim(n, oracle)
    return int(count_accessible_bruteforce_batch(n, [oracle.seed])[0])


@lru_cache(maxsize=4)
def _perm_tables(n: int):
    perms = np.array(list(itertools.permutations(range(1, n + 1))), dtype=np.int64)
    prefix = np.zeros_like(perms, dtype=np.uint64)
    acc = np.zeros(perms.shape[0], dtype=np.uint64)
    for j in range(n):
        prefix[:, j] = acc
        acc = acc | (_U64(1) << (perms[:, j] - 1).astype(np.uint64))
    return perms, prefix


def count_accessible_bruteforce_batch(n: int, seeds) -> np.ndarray:
    if not 1 <= n <= MAX_BRUTEFORCE_N:
        raise ValueError(f"brute force supports 1 <= n <= {MAX_BRUTEFORCE_N}, got {n}")
    seeds = np.asarray(seeds, dtype=np.uint64).ravel()
    perms, prefix = _perm_tables(n)
    out = np.empty(seeds.shape[0], dtype=np.int64)
    chunk = max(1, 40_000_000 // (perms.shape[0] * n))
    for lo in range(0, seeds.shape[0], chunk):
        st = seed_state(seeds[lo:lo + chunk])  # (C,)
        m2 = mix64_array(st[:, None, None] ^ prefix[None, :, :])
        h = mix64_array(m2 ^ perms.astype(np.uint64)[None, :, :])
        w = ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53
        inc = np.all(np.diff(w, axis=2) > 0, axis=2) if n > 1 else np.ones(w.shape[:2], dtype=bool)
        out[lo:lo + chunk] = inc.sum(axis=1)
    return out


def list_accessible(n: int, oracle: WeightOracle) -> list[DirectPath]:
    """The exact set of accessible bottom-to-top paths, in sorted order.

    Recovered by backtracking through the counting sweep's parent trail;
    guarded at 10^6 paths so that pathological seeds cannot exhaust memory.
    """
    _require_dim(n, oracle)
    return [DirectPath.full(n, d) for d in accessible_path_directions(n, oracle.seed)]


def _require_dim(n: int, oracle: WeightOracle):
    if not 1 <= n <= MAX_N:
        raise ValueError(f"supported dimensions are 1 <= n <= {MAX_N}, got {n}")
    if oracle.n != n:
        raise ValueError(f"oracle dimension {oracle.n} does not match n={n}")


# ---------------------------------------------------------------------------
# Joint accessibility of a path pair.
# ---------------------------------------------------------------------------

def joint_accessibility(enc: GapEncoding, n: int) -> Fraction:
    """P(path and reference both accessible) from the gap encoding.

    Equals the product of central binomials C(2*a_i, a_i) over the gaps,
    divided by (2n - s)! where s is the number of shared edges.
    """
    if enc.n != n:
        raise ValueError(f"encoding dimension {enc.n} does not match n={n}")
    num = 1
    for a in enc.gaps:
        num *= math.comb(2 * a, a)
    return Fraction(num, math.factorial(2 * n - enc.shared))


def joint_accessibility_bruteforce(pi: DirectPath, ref: DirectPath) -> Fraction:
    """P(both accessible) by counting orderings of the union of edge sets.

    The weights induce a uniformly random permutation of the union; both
    paths are accessible exactly in the orderings that extend both chains.
    The extension count is evaluated by a subset DP that places one edge at a
    time (each valid ordering is generated once), so the result equals literal
    enumeration over (union size)! orderings without materializing them.
    """
    if pi.n != ref.n or not (pi.is_full() and ref.is_full()):
        raise ValueError("need two full paths of equal dimension")
    e1 = [(b, d) for b, d in zip([v.bits for v in pi.vertices()[:-1]], pi.directions)]
    e2 = [(b, d) for b, d in zip([v.bits for v in ref.vertices()[:-1]], ref.directions)]
    shared = [(i, j) for i, a in enumerate(e1) for j, b in enumerate(e2) if a == b]
    m = 2 * pi.n - len(shared)
    if m > 12:
        raise ValueError(f"edge union of size {m} exceeds the supported 12")
    count = _linear_extensions(len(e1), len(e2), tuple(shared))
    return Fraction(count, math.factorial(m))


@lru_cache(maxsize=None)
def _linear_extensions(len1: int, len2: int, shared: tuple[tuple[int, int], ...]) -> int:
    """Number of orderings of two chains glued at the given position pairs."""
    id2 = {}  # chain-2 position -> element id
    elems = len1
    for i, j in shared:
        id2[j] = i
    for j in range(len2):
        if j not in id2:
            id2[j] = elems
            elems += 1
    # Immediate predecessor bitmasks within the glued poset.
    pred = [0] * elems
    for i in range(1, len1):
        pred[i] |= 1 << (i - 1)
    for j in range(1, len2):
        pred[id2[j]] |= 1 << id2[j - 1]
    f = [0] * (1 << elems)
    f[0] = 1
    for s in range(1 << elems):
        fs = f[s]
        if fs == 0:
            continue
        for e in range(elems):
            bit = 1 << e
            if not s & bit and (pred[e] & s) == pred[e]:
                f[s | bit] += fs
    return f[(1 << elems) - 1]


def second_moment_bruteforce(n: int) -> Fraction:
    """E[X_n^2] as an exact rational, summed over all ordered path pairs."""
    if n > 5:
        raise ValueError("pair sweep supported for n <= 5")
    paths = list(itertools.permutations(range(1, n + 1)))
    total = Fraction(0)
    for p in paths:
        pi = DirectPath.full(n, p)
        for q in paths:
            total += joint_accessibility_bruteforce(pi, DirectPath.full(n, q))
    return total
