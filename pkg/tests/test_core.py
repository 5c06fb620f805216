import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from temporalcube.core import (
    DirectPath,
    Edge,
    GapEncoding,
    Vertex,
    WeightOracle,
    canonical_path,
    decode_gap,
    encode_gap,
    is_accessible,
    iter_edges,
    iter_paths_between,
    num_direct_paths,
    seed_state,
    unit_from_state,
    unit_scalar,
)


class TestWeightOracle:
    def test_deterministic(self):
        o1 = WeightOracle(seed=42, n=8)
        o2 = WeightOracle(seed=42, n=8)
        e = Edge(Vertex.from_dims([1, 3], 8), 5)
        assert o1.weight(e) == o2.weight(e)
        assert 0.0 < o1.weight(e) < 1.0

    def test_open_interval_and_mismatch_guard(self):
        o = WeightOracle(seed=0, n=4)
        with pytest.raises(ValueError):
            o.weight(Edge(Vertex(0, 5), 1))

    def test_invalid_edge_rejected(self):
        with pytest.raises(ValueError):
            Edge(Vertex.from_dims([2], 4), 2)
        with pytest.raises(ValueError):
            Edge(Vertex(0, 4), 5)

    def test_scalar_equals_vectorized(self):
        o = WeightOracle(seed=987654321, n=20)
        for bits in [0, 5, (1 << 19) | 3]:
            dirs = np.array([d for d in range(1, 21) if not bits >> (d - 1) & 1])
            vec = o.weights_from(bits, dirs)
            assert [o.weight_raw(bits, int(d)) for d in dirs] == list(vec)

    def test_sparse_mode_consistency(self):
        o = WeightOracle(seed=11, n=300)
        bits = (1 << 2) | (1 << 150) | (1 << 299)
        dirs = np.array([1, 10, 200])
        assert list(o.weights_from(bits, dirs)) == [o.weight_raw(bits, int(d)) for d in dirs]
        full = (1 << 300) - 1
        comp_base = (1 << 7) | (1 << 250)
        rows = o.weights_complement_rows(comp_base, dirs)
        for w, d in zip(rows, dirs):
            assert w == o.weight_raw(full & ~(comp_base | 1 << (int(d) - 1)), int(d))

    def test_adjacent_edges_differ(self):
        # Equal values for edges differing only in direction would break the
        # continuous-weight model; check a swath of pairs.
        o = WeightOracle(seed=3, n=16)
        for bits in range(0, 2**10, 37):
            free = [d for d in range(1, 17) if not bits >> (d - 1) & 1]
            vals = [o.weight_raw(bits, d) for d in free]
            assert len(set(vals)) == len(vals)

    def test_uniformity_mean_and_ks(self):
        # One-off statistical validation of the hash construction: 1e6 draws.
        state = seed_state(np.arange(1000, dtype=np.uint64))
        w = np.concatenate([
            unit_from_state(state, np.full(1000, a, dtype=np.uint64), d)
            for a in range(50) for d in range(1, 21)
        ])
        assert w.shape[0] == 10**6
        assert abs(w.mean() - 0.5) < 0.002
        xs = np.sort(w)
        m = xs.shape[0]
        ks = max(np.abs(np.arange(1, m + 1) / m - xs).max(), np.abs(np.arange(m) / m - xs).max())
        # p > 1e-3 corresponds to KS*sqrt(m) < 1.95 for large m.
        assert ks * math.sqrt(m) < 1.95

    @given(st.integers(0, 2**64 - 1), st.integers(0, 2**64 - 1), st.integers(1, 2**20))
    @settings(max_examples=200, deadline=None)
    def test_unit_scalar_in_open_interval(self, seed, a, b):
        v = unit_scalar(seed, a, b)
        assert 0.0 < v < 1.0


class TestPaths:
    def test_vertex_level_and_dims(self):
        v = Vertex.from_dims([2, 5], 6)
        assert v.level == 2 and v.dims == (2, 5)
        with pytest.raises(ValueError):
            Vertex.from_dims([7], 6)

    def test_edge_encoding(self):
        e = Edge(Vertex.from_dims([1, 2], 5), 4)
        assert e.encode() == "v:3,d:4"
        assert e.level == 3 and e.upper.dims == (1, 2, 4)

    def test_edge_count(self):
        for n in [1, 2, 5, 10]:
            assert sum(1 for _ in iter_edges(n)) == n * 2 ** (n - 1)

    def test_edge_count_n16(self):
        assert sum(1 for _ in iter_edges(16)) == 16 * 2**15

    def test_paths_between_count(self):
        for n, lo, hi in [(6, [1], [1, 2, 3, 4]), (8, [], [1, 2, 3, 4, 5, 6]), (5, [2, 3], [2, 3])]:
            v, w = Vertex.from_dims(lo, n), Vertex.from_dims(hi, n)
            paths = list(iter_paths_between(v, w))
            assert len(paths) == num_direct_paths(v, w) == math.factorial(w.level - v.level)
            assert len({p.directions for p in paths}) == len(paths)
        v, w = Vertex.from_dims([1], 4), Vertex.from_dims([2, 3], 4)
        assert num_direct_paths(v, w) == 0 and list(iter_paths_between(v, w)) == []

    def test_path_validation(self):
        with pytest.raises(ValueError):
            DirectPath(Vertex.from_dims([1], 4), (1, 2))
        with pytest.raises(ValueError):
            DirectPath(Vertex(0, 4), (2, 2))

    def test_accessibility_definition(self):
        # Single-edge paths carry no ordering constraint.
        o = WeightOracle(seed=5, n=4)
        assert is_accessible(DirectPath(Vertex(0, 4), (3,)), o)

    def test_accessibility_injected_weights(self):
        class Stub:
            def __init__(self, table):
                self.table = table

            def weight_raw(self, bits, d):
                return self.table[(bits, d)]

        inc = Stub({(0, 1): 0.2, (1, 2): 0.5, (3, 3): 0.9})
        dec = Stub({(0, 1): 0.2, (1, 2): 0.9, (3, 3): 0.5})
        p = DirectPath(Vertex(0, 3), (1, 2, 3))
        assert is_accessible(p, inc)
        assert not is_accessible(p, dec)

    def test_single_path_accessibility_frequency(self):
        # A fixed path is accessible with probability 1/n!; n=5 over 1e5 seeds.
        n, m = 5, 100_000
        state = seed_state(np.arange(m, dtype=np.uint64))
        prev = np.full(m, -1.0)
        ok = np.ones(m, dtype=bool)
        bits = 0
        for d in range(1, n + 1):
            w = unit_from_state(state, np.full(m, bits, dtype=np.uint64), d)
            ok &= w > prev
            prev = w
            bits |= 1 << (d - 1)
        p = ok.mean()
        target = 1 / math.factorial(n)
        sigma = math.sqrt(target * (1 - target) / m)
        assert abs(p - target) <= 3 * sigma


class TestGapEncoding:
    def test_self_encoding(self):
        ref = canonical_path(5)
        enc = encode_gap(ref, ref)
        assert enc.shared == 5 and enc.gaps == (0,) * 6 and enc.num_gaps == 0
        assert decode_gap(enc, ref) == ref

    def test_two_shared_structures(self):
        ref = canonical_path(5)
        enc = encode_gap(DirectPath.full(5, (2, 1, 3, 5, 4)), ref)
        assert (enc.shared, enc.gaps) == (1, (2, 2))
        enc2 = encode_gap(DirectPath.full(5, (1, 3, 4, 2, 5)), ref)
        assert (enc2.shared, enc2.gaps) == (2, (0, 3, 0))

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_bijective_roundtrip(self, n):
        import itertools

        ref = canonical_path(n)
        seen = set()
        for perm in itertools.permutations(range(1, n + 1)):
            p = DirectPath.full(n, perm)
            enc = encode_gap(p, ref)
            assert decode_gap(enc, ref) == p
            g = enc.num_gaps
            if enc.shared < n:
                assert 1 <= g <= min(enc.shared + 1, (n - enc.shared) // 2)
            seen.add((enc.shared, enc.gaps, tuple(s.directions for s in enc.subpaths)))
        assert len(seen) == math.factorial(n)

    def test_decode_enumeration_covers_all_paths(self):
        # Every valid (gaps, subpaths) pair at n=4 decodes to a distinct path.
        import itertools

        n = 4
        ref = canonical_path(n)

        def disjoint_subpaths(m):
            if m == 0:
                return [DirectPath(Vertex(0, 0), ())]
            out = []
            for perm in itertools.permutations(range(1, m + 1)):
                bits = 0
                ok = True
                for d in perm:
                    if bits == (1 << (d - 1)) - 1:
                        ok = False
                        break
                    bits |= 1 << (d - 1)
                if ok:
                    out.append(DirectPath(Vertex(0, m), perm))
            return out

        decoded = set()
        for s in list(range(0, n - 1)) + [n]:
            slots = s + 1
            for comp in itertools.product(range(n + 1), repeat=slots):
                if sum(comp) != n - s or any(c == 1 for c in comp):
                    continue
                for subs in itertools.product(*[disjoint_subpaths(c) for c in comp]):
                    try:
                        enc = GapEncoding(n, s, comp, tuple(subs))
                    except ValueError:
                        continue
                    decoded.add(decode_gap(enc, ref).directions)
        assert len(decoded) == math.factorial(n)

    @given(st.permutations(list(range(1, 7))), st.permutations(list(range(1, 7))))
    @settings(max_examples=300, deadline=None)
    def test_roundtrip_arbitrary_reference(self, p, q):
        pi = DirectPath.full(6, p)
        ref = DirectPath.full(6, q)
        assert decode_gap(encode_gap(pi, ref), ref) == pi

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            encode_gap(canonical_path(4), canonical_path(5))
