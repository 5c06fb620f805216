"""Core types for the randomly edge-weighted hypercube.

Vertices are subsets of {1, ..., n} stored as bit sets, edges are keyed by
their lower endpoint plus a direction, and every edge carries a deterministic
uniform(0, 1) weight derived from a 64-bit seed by a counter-based hash.  A
direct path from the bottom vertex to the top vertex is a permutation of the
n directions; it is accessible when its edge weights strictly increase.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

MAX_DIMENSION = 62          # bit-set vertex/path types: one machine word
MAX_ORACLE_DIMENSION = 1 << 20  # weight oracle alone scales far beyond that

_MASK64 = (1 << 64) - 1
_SEED_SALT = 0x9E3779B97F4A7C15
# Draw-index domains for the counter-based generator.  Edge weights in
# packed mode use b = direction in [1, 62], sparse mode reserves b = 63, and
# every other consumer picks b >= 64, so no two consumers ever hash the same
# (seed, a, b) triple.
DOMAIN_EDGE_MAX = 62
_DOM_SPARSE_EDGE = 63


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective 64-bit mixer with full avalanche."""
    x &= _MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK64
    x ^= x >> 31
    return x


def unit_scalar(seed: int, a: int, b: int) -> float:
    """Deterministic uniform draw in the open interval (0, 1).

    The triple (seed, a, b) fully determines the value; a is a 64-bit
    payload (e.g. vertex bits or a sample index) and b a small domain tag.
    """
    h = mix64(mix64(mix64(seed ^ _SEED_SALT) ^ a) ^ b)
    return ((h >> 11) + 0.5) * 2.0**-53


_U64 = np.uint64
_C1 = _U64(0xBF58476D1CE4E5B9)
_C2 = _U64(0x94D049BB133111EB)
_S30 = _U64(30)
_S27 = _U64(27)
_S31 = _U64(31)
_S11 = _U64(11)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer over uint64 arrays (wrapping mod 2^64)."""
    x = x.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        x ^= x >> _S30
        x *= _C1
        x ^= x >> _S27
        x *= _C2
        x ^= x >> _S31
    return x


def seed_state(seed) -> np.ndarray | np.uint64:
    """First mixing stage, reusable across many draws for the same seed."""
    return mix64_array(np.asarray(seed, dtype=np.uint64) ^ _U64(_SEED_SALT))


def unit_from_state(state, a, b) -> np.ndarray:
    """Vectorized uniform draws; state = seed_state(seed), broadcastable."""
    h = mix64_array(mix64_array(np.asarray(state, dtype=np.uint64) ^ np.asarray(a, dtype=np.uint64)) ^ np.asarray(b, dtype=np.uint64))
    return ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53


@dataclass(frozen=True)
class Vertex:
    """Hypercube vertex: a subset of the dimensions {1, ..., n} as a bit set."""

    bits: int
    n: int

    def __post_init__(self):
        if not 0 <= self.n <= MAX_DIMENSION:
            raise ValueError(f"dimension {self.n} outside [0, {MAX_DIMENSION}]")
        if not 0 <= self.bits < (1 << self.n):
            raise ValueError(f"vertex bits {self.bits:#x} not a subset of [1, {self.n}]")

    @classmethod
    def from_dims(cls, dims, n: int) -> "Vertex":
        bits = 0
        for d in dims:
            if not 1 <= d <= n:
                raise ValueError(f"dimension {d} outside [1, {n}]")
            bits |= 1 << (d - 1)
        return cls(bits, n)

    @property
    def level(self) -> int:
        return self.bits.bit_count()

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for d in range(1, self.n + 1) if self.bits >> (d - 1) & 1)

    def has(self, direction: int) -> bool:
        return bool(self.bits >> (direction - 1) & 1)

    def with_dim(self, direction: int) -> "Vertex":
        return Vertex(self.bits | 1 << (direction - 1), self.n)


@dataclass(frozen=True)
class Edge:
    """Hypercube edge, keyed by its lower endpoint and the added direction."""

    lower: Vertex
    direction: int

    def __post_init__(self):
        if not 1 <= self.direction <= self.lower.n:
            raise ValueError(f"direction {self.direction} outside [1, {self.lower.n}]")
        if self.lower.has(self.direction):
            raise ValueError(f"direction {self.direction} already set in lower vertex")

    @property
    def upper(self) -> Vertex:
        return self.lower.with_dim(self.direction)

    @property
    def level(self) -> int:
        return self.lower.level + 1

    def encode(self) -> str:
        """Canonical textual form used in debug dumps and golden tests."""
        return f"v:{self.lower.bits:x},d:{self.direction}"


def _dims_of(bits: int) -> list[int]:
    out = []
    d = 1
    while bits:
        if bits & 1:
            out.append(d)
        bits >>= 1
        d += 1
    return out


def _chain_mix(h: int, xs) -> int:
    for x in xs:
        h = mix64(h ^ x)
    return h


def sparse_edge_code(n: int, lower_bits: int, direction: int) -> int:
    """Canonical 64-bit code of an edge in dimensions beyond one machine word.

    Chains the mixer over the smaller of the lower vertex's dimension set and
    its complement (tagged to distinguish the two), then folds in the
    direction; near either endpoint the chain stays as short as the level.
    """
    full = (1 << n) - 1
    comp = full & ~lower_bits
    if 2 * lower_bits.bit_count() <= n:
        h = _chain_mix(mix64(1), _dims_of(lower_bits))
    else:
        h = _chain_mix(mix64(2), _dims_of(comp))
    return mix64(h ^ (n + direction))


@dataclass(frozen=True)
class WeightOracle:
    """Deterministic map from edges to uniform(0, 1) weights.

    Weights are pure functions of (seed, canonical edge code) only, so any
    evaluation order, thread schedule, or process layout observes identical
    values.  Memory use is O(1) regardless of dimension.  Dimensions up to 62
    key edges by the packed (lower bits, direction) pair; larger dimensions
    use the sparse chained code, which costs O(min(level, n - level)) per
    edge and therefore stays cheap near both endpoints.
    """

    seed: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_ORACLE_DIMENSION:
            raise ValueError(f"dimension {self.n} outside [1, {MAX_ORACLE_DIMENSION}]")

    def weight(self, e: Edge) -> float:
        if e.lower.n != self.n:
            raise ValueError(f"edge dimension {e.lower.n} does not match oracle dimension {self.n}")
        return self.weight_raw(e.lower.bits, e.direction)

    def weight_raw(self, lower_bits: int, direction: int) -> float:
        """Fast path on raw bits; callers must guarantee validity."""
        if self.n <= MAX_DIMENSION:
            return unit_scalar(self.seed, lower_bits, direction)
        return unit_scalar(self.seed, sparse_edge_code(self.n, lower_bits, direction), _DOM_SPARSE_EDGE)

    def weights_from(self, lower_bits: int, directions: np.ndarray) -> np.ndarray:
        """Vectorized weights of the edges (lower_bits, d) for d in directions."""
        directions = np.asarray(directions, dtype=np.uint64)
        state = seed_state(self.seed & _MASK64)
        if self.n <= MAX_DIMENSION:
            a = mix64_array(np.broadcast_to(state ^ _U64(lower_bits), directions.shape).copy())
            h = mix64_array(a ^ directions)
            return ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53
        full = (1 << self.n) - 1
        if 2 * lower_bits.bit_count() <= self.n:
            prefix = _chain_mix(mix64(1), _dims_of(lower_bits))
        else:
            prefix = _chain_mix(mix64(2), _dims_of(full & ~lower_bits))
        codes = mix64_array(np.broadcast_to(_U64(prefix), directions.shape) ^ (directions + _U64(self.n)))
        return unit_from_state(state, codes, _DOM_SPARSE_EDGE)

    def weights_pairs(self, lower_bits: np.ndarray, directions: np.ndarray) -> np.ndarray:
        """Vectorized weights for per-entry (lower, direction) pairs (packed mode)."""
        if self.n > MAX_DIMENSION:
            raise ValueError("pairwise raw-bit form requires packed mode (n <= 62)")
        state = seed_state(self.seed & _MASK64)
        m2 = mix64_array(np.asarray(lower_bits, dtype=np.uint64) ^ state)
        h = mix64_array(m2 ^ np.asarray(directions, dtype=np.uint64))
        return ((h >> _S11).astype(np.float64) + 0.5) * 2.0**-53

    def weights_complement_rows(self, comp_base_bits: int, directions: np.ndarray) -> np.ndarray:
        """Weights of edges whose lower vertex is the complement of base + {d}.

        This is the row the inverted construction queries: for each d the
        original lower vertex is full minus comp_base minus {d}.  Requires
        every direction to lie outside comp_base.
        """
        directions = np.asarray(directions, dtype=np.uint64)
        state = seed_state(self.seed & _MASK64)
        if self.n <= MAX_DIMENSION:
            full = _U64((1 << self.n) - 1)
            lowers = (full ^ _U64(comp_base_bits)) ^ (_U64(1) << (directions - _U64(1)))
            return self.weights_pairs(lowers, directions)
        codes = _sparse_codes_inserting(self.n, sorted(_dims_of(comp_base_bits)), directions)
        return unit_from_state(state, codes, _DOM_SPARSE_EDGE)


def _sparse_codes_inserting(n: int, base: list[int], directions: np.ndarray) -> np.ndarray:
    """Chained codes over sorted(base + [d]) per direction d, d outside base."""
    dirs64 = directions.astype(np.int64)
    q = len(base)
    base_arr = np.asarray(base, dtype=np.int64)
    pos = np.searchsorted(base_arr, dirs64)
    h = np.broadcast_to(np.uint64(mix64(2)), dirs64.shape).copy()
    for j in range(q + 1):
        at_j = np.where(
            j < pos,
            base_arr[min(j, q - 1)] if q else 0,
            np.where(j == pos, dirs64, base_arr[max(j - 1, 0)] if q else 0),
        )
        h = mix64_array(h ^ at_j.astype(np.uint64))
    return mix64_array(h ^ (dirs64 + n).astype(np.uint64))


@dataclass(frozen=True)
class DirectPath:
    """Direct (geodesic) path: a start vertex plus distinct new directions."""

    start: Vertex
    directions: tuple[int, ...]

    def __post_init__(self):
        seen = self.start.bits
        for d in self.directions:
            if not 1 <= d <= self.start.n:
                raise ValueError(f"direction {d} outside [1, {self.start.n}]")
            bit = 1 << (d - 1)
            if seen & bit:
                raise ValueError(f"direction {d} repeated or already in start vertex")
            seen |= bit

    @classmethod
    def full(cls, n: int, directions) -> "DirectPath":
        """Bottom-to-top path: directions must be a permutation of 1..n."""
        p = cls(Vertex(0, n), tuple(directions))
        if p.length != n:
            raise ValueError("full path must use every direction exactly once")
        return p

    @property
    def n(self) -> int:
        return self.start.n

    @property
    def length(self) -> int:
        return len(self.directions)

    @property
    def end(self) -> Vertex:
        bits = self.start.bits
        for d in self.directions:
            bits |= 1 << (d - 1)
        return Vertex(bits, self.start.n)

    def vertices(self) -> list[Vertex]:
        out = [self.start]
        bits = self.start.bits
        for d in self.directions:
            bits |= 1 << (d - 1)
            out.append(Vertex(bits, self.start.n))
        return out

    def edges(self) -> list[Edge]:
        out = []
        bits = self.start.bits
        for d in self.directions:
            out.append(Edge(Vertex(bits, self.start.n), d))
            bits |= 1 << (d - 1)
        return out

    def is_full(self) -> bool:
        return self.start.bits == 0 and self.length == self.n


def canonical_path(n: int) -> DirectPath:
    """The reference path taking directions 1, 2, ..., n in order."""
    return DirectPath.full(n, range(1, n + 1))


def is_accessible(path: DirectPath, oracle: WeightOracle) -> bool:
    """True iff the edge weights strictly increase along the path.

    Ties (probability ~2^-64 per pair) count as non-accessible, which matches
    the almost-surely-distinct continuous weight model.
    """
    prev = -math.inf
    bits = path.start.bits
    for d in path.directions:
        w = oracle.weight_raw(bits, d)
        if w <= prev:
            return False
        prev = w
        bits |= 1 << (d - 1)
    return True


def num_direct_paths(v: Vertex, w: Vertex) -> int:
    """|paths from v to w| = (level difference)! when v is a subset of w, else 0."""
    if v.n != w.n:
        raise ValueError("vertices live in different dimensions")
    if v.bits & ~w.bits:
        return 0
    return math.factorial(w.level - v.level)


def iter_paths_between(v: Vertex, w: Vertex):
    """Yield every direct path from v to w (empty when v is not below w)."""
    if v.n != w.n or v.bits & ~w.bits:
        return
    diff = [d for d in range(1, v.n + 1) if (w.bits >> (d - 1) & 1) and not (v.bits >> (d - 1) & 1)]
    for perm in itertools.permutations(diff):
        yield DirectPath(v, perm)


def iter_edges(n: int):
    """Enumerate all n * 2^(n-1) edges of the n-dimensional hypercube."""
    for bits in range(1 << n):
        v = Vertex(bits, n)
        for d in range(1, n + 1):
            if not bits >> (d - 1) & 1:
                yield Edge(v, d)


@dataclass(frozen=True)
class GapEncoding:
    """A full path encoded relative to a reference path.

    ``shared`` counts the edges the path has in common with the reference;
    ``gaps`` (length shared+1) gives the number of path edges strictly between
    consecutive shared edges (and before the first / after the last one); and
    ``subpaths[i]`` is the path's detour across gap i, relabeled into the
    gaps[i]-dimensional subcube so that the reference's own detour becomes the
    canonical path there.  Gap entries of 1 are impossible, each nonzero
    subpath is edge-disjoint from its canonical path, and the pair (gaps,
    subpaths) recovers the original path exactly.
    """

    n: int
    shared: int
    gaps: tuple[int, ...]
    subpaths: tuple[DirectPath, ...]

    def __post_init__(self):
        s = self.shared
        if not 0 <= s <= self.n:
            raise ValueError(f"shared count {s} outside [0, {self.n}]")
        if len(self.gaps) != s + 1 or len(self.subpaths) != s + 1:
            raise ValueError("gaps and subpaths must have length shared + 1")
        if sum(self.gaps) != self.n - s:
            raise ValueError("gap lengths must sum to n - shared")
        if any(a == 1 for a in self.gaps):
            raise ValueError("gap of length 1 is impossible")
        if s == self.n - 1:
            raise ValueError("sharing exactly n - 1 edges is impossible")
        g = self.num_gaps
        if s < self.n and not 1 <= g <= min(s + 1, (self.n - s) // 2):
            raise ValueError(f"gap count {g} invalid for (n={self.n}, s={s})")
        for a, sub in zip(self.gaps, self.subpaths):
            if sub.n != a or sub.start.bits != 0 or sub.length != a:
                raise ValueError("subpath does not fill its gap")
            if a >= 2 and not _edge_disjoint_from_canonical(sub):
                raise ValueError("gap subpath must avoid the canonical subcube path")

    @property
    def num_gaps(self) -> int:
        return sum(1 for a in self.gaps if a > 0)


def _edge_disjoint_from_canonical(sub: DirectPath) -> bool:
    # Canonical edges in the m-cube are (bits = 2^k - 1, direction = k + 1).
    bits = 0
    for d in sub.directions:
        if bits == (1 << (d - 1)) - 1:
            return False
        bits |= 1 << (d - 1)
    return True


def encode_gap(pi: DirectPath, ref: DirectPath) -> GapEncoding:
    """Encode pi relative to ref; both must be full bottom-to-top paths."""
    n = ref.n
    if pi.n != n:
        raise ValueError(f"path dimensions differ: {pi.n} vs {n}")
    if not (pi.is_full() and ref.is_full()):
        raise ValueError("both paths must run from the bottom vertex to the top vertex")

    shared_pos = []  # 1-based edge positions, equal in both paths
    bits_pi = bits_ref = 0
    for i in range(n):
        if bits_pi == bits_ref and pi.directions[i] == ref.directions[i]:
            shared_pos.append(i + 1)
        bits_pi |= 1 << (pi.directions[i] - 1)
        bits_ref |= 1 << (ref.directions[i] - 1)

    gaps = []
    subpaths = []
    prev = 0  # level of the top vertex of the previous shared edge
    for pos in shared_pos + [n + 1]:
        lo, hi = prev, pos - 1  # gap spans levels (lo, hi]
        block = ref.directions[lo:hi]
        relabel = {d: j + 1 for j, d in enumerate(block)}
        seg = tuple(relabel[d] for d in pi.directions[lo:hi])
        gaps.append(hi - lo)
        subpaths.append(DirectPath(Vertex(0, hi - lo), seg))
        prev = pos
    return GapEncoding(n, len(shared_pos), tuple(gaps), tuple(subpaths))


def decode_gap(enc: GapEncoding, ref: DirectPath) -> DirectPath:
    """Inverse of encode_gap for the same reference path."""
    if not ref.is_full() or ref.n != enc.n:
        raise ValueError("reference must be a full path of matching dimension")
    out = []
    pos = 0
    for i, (a, sub) in enumerate(zip(enc.gaps, enc.subpaths)):
        block = ref.directions[pos:pos + a]
        out.extend(block[j - 1] for j in sub.directions)
        pos += a
        if i < enc.shared:
            out.append(ref.directions[pos])
            pos += 1
    return DirectPath.full(enc.n, out)
