"""Greedy r-ary trees at the hypercube endpoints and their functionals.

From each endpoint a depth-k tree is grown over the transformed weights
wtilde = -log(1 - W): every node keeps the r admissible directions of
smallest transformed weight, where admissible means larger than the weight
on the node's own entry edge and not chosen by any ancestor.  The top tree
is the same construction run on the inverted cube (vertices complemented,
weights flipped to 1 - W), so a single builder serves both sides.

The leaf functional z = sum over depth-k leaves of exp(-n * wtilde)
approaches a unit-rate exponential as k grows with r ~ ceil(1.5 ln k); its
idealized counterpart replaces the finite-n increments by independent
exponentials.  The conditional mean of the tree-restricted path count given
the outer weights has the closed form

    lambda = sum over leaf pairs (u, u') with u below u' and w + w' <= 1
             of (1 - w - w')^(n - 2k),

with w the untransformed bottom leaf-edge weight and w' the flipped top one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import exact
from .core import WeightOracle, seed_state, unit_from_state
from .exact import MAX_N

IDEAL_NODE_GUARD = 10**7

# Draw-index domains (edge weights own 1..62, the mixed-Poisson sampler 64..).
_DOM_IDEAL = 128       # + child level
_DOM_POP_DELTA = 256   # + level
_DOM_POP_PICK = 512    # + level


@dataclass(frozen=True)
class TreeNode:
    index: tuple[int, ...]
    vertex_bits: int        # in the tree's own frame (inverted for the top side)
    wtilde: float           # transformed weight of the entry edge
    weight: float           # untransformed frame weight, 1 - exp(-wtilde)
    chosen: tuple[int, ...]  # directions handed to the children, in rank order


@dataclass(frozen=True)
class GreedyTree:
    side: str
    n: int
    k: int
    r: int
    seed: int
    nodes: dict[tuple[int, ...], TreeNode]

    def leaves(self) -> list[TreeNode]:
        return [nd for ix, nd in self.nodes.items() if len(ix) == self.k]

    def leaf_vertices_original(self) -> list[int]:
        """Leaf vertex bit sets in the original cube's frame."""
        full = (1 << self.n) - 1
        if self.side == "bottom":
            return [nd.vertex_bits for nd in self.leaves()]
        return [full & ~nd.vertex_bits for nd in self.leaves()]

    def leaf_direction_tuples(self) -> set[tuple[int, ...]]:
        """Root-to-leaf direction sequences, in the tree's own frame."""
        out = set()
        for nd in self.leaves():
            dirs = []
            for ell in range(1, self.k + 1):
                parent = self.nodes[nd.index[: ell - 1]]
                dirs.append(parent.chosen[nd.index[ell - 1] - 1])
            out.add(tuple(dirs))
        return out


class _InvertedOracle:
    """View of an oracle on the complemented cube with weights 1 - W."""

    def __init__(self, oracle: WeightOracle):
        self._oracle = oracle
        self.n = oracle.n
        self._full = (1 << oracle.n) - 1

    def weight_raw(self, lower_bits: int, direction: int) -> float:
        orig_lower = self._full & ~(lower_bits | 1 << (direction - 1))
        return 1.0 - self._oracle.weight_raw(orig_lower, direction)

    def weights_from(self, lower_bits: int, directions: np.ndarray) -> np.ndarray:
        return 1.0 - self._oracle.weights_complement_rows(lower_bits, directions)


def build_greedy_tree(n: int, k: int, r: int, oracle: WeightOracle, side: str = "bottom") -> GreedyTree:
    """Grow the depth-k greedy r-ary tree from one endpoint.

    A node indexed (i_1, ..., i_l) takes, at each step, the i_j-th smallest
    admissible transformed weight; indices whose step does not exist (fewer
    admissible directions than the rank asks for) are simply absent from the
    node map, which realizes the weight-infinity convention for the
    functionals below.
    """
    if side not in ("bottom", "top"):
        raise ValueError("side must be 'bottom' or 'top'")
    if oracle.n != n:
        raise ValueError(f"oracle dimension {oracle.n} does not match n={n}")
    if k < 1 or r < 1:
        raise ValueError("need k >= 1 and r >= 1")
    if (k - 1) * r >= n:
        raise ValueError(f"infeasible combination: (k-1)*r = {(k - 1) * r} must stay below n = {n}")
    view = oracle if side == "bottom" else _InvertedOracle(oracle)
    all_dirs = np.arange(1, n + 1, dtype=np.int64)

    nodes: dict[tuple[int, ...], TreeNode] = {}
    no_exclusions = np.zeros(n, dtype=bool)
    frontier = [((), 0, no_exclusions, 0.0, 0.0)]  # index, vertex bits, excluded, wtilde, weight
    for level in range(1, k + 1):
        nxt = []
        for index, bits, excluded, wt_in, w_in in frontier:
            cand = all_dirs[~excluded]
            w = view.weights_from(bits, cand)
            wt = -np.log1p(-w)
            ok = wt > wt_in
            cand, wt, w = cand[ok], wt[ok], w[ok]
            if cand.shape[0] > 4 * r:
                part = np.argpartition(wt, r)[:r]
                order = part[np.argsort(wt[part])]
            else:
                order = np.argsort(wt)[:r]
            chosen = tuple(int(cand[j]) for j in order)
            nodes[index] = TreeNode(index, bits, wt_in, w_in, chosen)
            new_excluded = excluded.copy()
            new_excluded[[d - 1 for d in chosen]] = True
            for rank, j in enumerate(order, start=1):
                d = int(cand[j])
                nxt.append((index + (rank,), bits | 1 << (d - 1), new_excluded, float(wt[j]), float(w[j])))
        frontier = nxt
    for index, bits, _, wt_in, w_in in frontier:
        nodes[index] = TreeNode(index, bits, wt_in, w_in, ())
    return GreedyTree(side, n, k, r, oracle.seed, nodes)


def leaf_functional(tree: GreedyTree) -> float:
    """z = sum over existing depth-k leaves of exp(-n * wtilde)."""
    return float(sum(math.exp(-tree.n * nd.wtilde) for nd in tree.leaves()))


def default_branching(k: int) -> int:
    """r = ceil(1.5 ln k): the branching that keeps the trees exhaustive."""
    if k < 2:
        raise ValueError("defined for k >= 2")
    return math.ceil(1.5 * math.log(k))


def coupling_dimension_guide(k: int, r: int) -> int:
    """Dimension scale ~ 2 k^4 r^2 ln r above which the increment coupling holds."""
    if k < 2 or r < 2:
        raise ValueError("defined for k >= 2 and r >= 2")
    return math.ceil(2 * k**4 * r**2 * math.log(r))


# ---------------------------------------------------------------------------
# Idealized functional with independent exponential increments.
# ---------------------------------------------------------------------------

def ideal_functional_samples(k: int, r: int, seed: int, count: int) -> np.ndarray:
    """Independent samples of the idealized leaf functional.

    The double sum over leaf indices is evaluated bottom-up: the value of a
    node is sum over child slots i of exp(-(Delta of children 1..i)) times
    the child subtree value, which reproduces the sum over all r^k leaves
    of exp(-(sum of increments over the leaf's predecessor set)) exactly.
    """
    if r**k > IDEAL_NODE_GUARD:
        raise ValueError(f"r^k = {r**k} exceeds the {IDEAL_NODE_GUARD} node guard")
    state = seed_state(np.uint64(int(seed) & (2**64 - 1)))
    out = np.empty(count)
    chunk = max(1, 2**22 // max(r**k, 1))
    for lo in range(0, count, chunk):
        m = min(count, lo + chunk) - lo
        j = (np.arange(lo, lo + m, dtype=np.uint64) << np.uint64(30))[:, None, None]
        g = np.ones((m, r ** (k - 1), r))
        for level in range(k, 0, -1):
            width = r ** (level - 1)
            node = np.arange(width * r, dtype=np.uint64).reshape(1, width, r)
            u = unit_from_state(state, j | node, _DOM_IDEAL + level)
            cums = np.cumsum(-np.log1p(-u), axis=2)
            vals = (np.exp(-cums) * g[:, : width * r].reshape(m, width, r)).sum(axis=2)
            g = vals
        out[lo:lo + m] = g[:, 0]
    return out


def ideal_functional_population(k: int, r: int, count: int, seed: int) -> np.ndarray:
    """Population-propagation samples of the idealized functional.

    Each of the count members is built per level from r freshly drawn
    exponential increments and r members of the previous level's population
    picked uniformly at random, so every member has exactly the target
    marginal law; members are weakly dependent across the population
    (collision probability of order k r^2 / count), which widens empirical
    fluctuation slightly but leaves all one-sample statistics honest.  This
    is the only way to reach depths where r^k dwarfs any node budget.
    """
    if count < 2 * r:
        raise ValueError("population too small for the branching")
    state = seed_state(np.uint64(int(seed) & (2**64 - 1)))
    pop = np.ones(count)
    a = ((np.arange(count, dtype=np.uint64) << np.uint64(6))[:, None]
         | np.arange(r, dtype=np.uint64)[None, :])
    for level in range(1, k + 1):
        u = unit_from_state(state, a, _DOM_POP_DELTA + level)
        cums = np.cumsum(-np.log1p(-u), axis=1)
        picks = np.minimum(
            (unit_from_state(state, a, _DOM_POP_PICK + level) * count).astype(np.int64),
            count - 1,
        )
        pop = (np.exp(-cums) * pop[picks]).sum(axis=1)
    return pop


# ---------------------------------------------------------------------------
# Conditional mean and tree-restricted count.
# ---------------------------------------------------------------------------

def _require_joint(n: int, k: int, r: int):
    if k > n // 2:
        raise ValueError(f"joint use of both trees needs k <= n/2, got k={k}, n={n}")
    if (k - 1) * r >= n - k:
        raise ValueError("trees too greedy for a joint construction at this dimension")


def middle_conditional_mean(bottom: GreedyTree, top: GreedyTree) -> float:
    """lambda: conditional mean of the tree-restricted count given outer weights."""
    if (bottom.n, bottom.k, bottom.r) != (top.n, top.k, top.r) or bottom.seed != top.seed:
        raise ValueError("trees disagree on (n, k, r) or seed")
    if bottom.side != "bottom" or top.side != "top":
        raise ValueError("need one bottom tree and one top tree")
    n, k = bottom.n, bottom.k
    _require_joint(n, k, bottom.r)
    lam = 0.0
    tops = [(bits, nd.weight) for bits, nd in zip(top.leaf_vertices_original(), top.leaves())]
    for u_bits, nd in zip(bottom.leaf_vertices_original(), bottom.leaves()):
        w = nd.weight
        for up_bits, wp in tops:
            if (u_bits & ~up_bits) == 0 and w + wp <= 1.0:
                lam += math.exp((n - 2 * k) * math.log1p(-(w + wp)))
    return lam


def tree_restricted_count(n: int, k: int, r: int, oracle: WeightOracle,
                          path_dirs: list[tuple[int, ...]] | None = None) -> int:
    """Accessible paths whose first and last k edges run inside the trees.

    Implemented by filtering the full accessible-path list after the fact:
    the first k directions must trace a bottom root-to-leaf sequence and the
    last k, reversed, a top one.  path_dirs may pass a precomputed list of
    accessible direction tuples for this oracle.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"supported dimensions are 1 <= n <= {MAX_N}, got {n}")
    _require_joint(n, k, r)
    bottom = build_greedy_tree(n, k, r, oracle, "bottom")
    top = build_greedy_tree(n, k, r, oracle, "top")
    return tree_restricted_count_given(bottom, top, oracle, path_dirs)


def tree_restricted_count_given(bottom: GreedyTree, top: GreedyTree, oracle: WeightOracle,
                                path_dirs: list[tuple[int, ...]] | None = None) -> int:
    n, k = bottom.n, bottom.k
    if path_dirs is None:
        path_dirs = exact.accessible_path_directions(n, oracle.seed)
    prefixes = bottom.leaf_direction_tuples()
    suffixes = {tuple(reversed(t)) for t in top.leaf_direction_tuples()}
    return sum(1 for d in path_dirs if d[:k] in prefixes and d[n - k:] in suffixes)
