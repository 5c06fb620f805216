"""Second-moment machinery for pairs of accessible paths.

The second moment of the accessible-path count decomposes over pair classes
(s, g): pairs sharing s edges with g nontrivial gaps.  The class mean is

    overlap_mean(n, s, g) =
        C(s+1, g) * n!/(2n-s)! * sum over compositions x of n-s into g
        parts >= 2 of the product of w(x_i) * C(2*x_i, x_i),

where w(m) counts the direct paths of an m-cube that are edge-disjoint from a
fixed reference path.  Everything is evaluated exactly in big rationals for
small n and in log space (with an exact-ratio table) for large n; classes
whose composition count exceeds a budget fall back to a proven upper bound,
so that aggregate results are reported as intervals, never as fake points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

_EXACT_N = 16          # big-rational mode at or below this dimension
DEFAULT_BUDGET = 10**6  # composition-count limit for exact class evaluation


# ---------------------------------------------------------------------------
# Reference-disjoint path counts w(m).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisjointPathTable:
    """w(m) for m = 0..N exactly, plus the ratios w(m)/m! as floats.

    Satisfies the first-shared-edge decomposition
        m! = w(m) + sum_{k=1}^{m} w(k-1) * (m-k)!
    (classify each path by the position of its first edge shared with the
    reference; before it the path is disjoint in a (k-1)-subcube, after it
    the path is unconstrained).  w(0) = 1 by convention and w(1) = 0.
    """

    exact: tuple[int, ...]
    ratio: np.ndarray

    def __len__(self):
        return len(self.exact)


@lru_cache(maxsize=4)
def disjoint_path_table(n_max: int) -> DisjointPathTable:
    if n_max > 2000:
        raise ValueError("exact table supported for n_max <= 2000; use disjoint_path_ratios")
    fact = [1] * (n_max + 1)
    for m in range(1, n_max + 1):
        fact[m] = fact[m - 1] * m
    w = [0] * (n_max + 1)
    w[0] = 1
    for m in range(1, n_max + 1):
        w[m] = fact[m] - sum(w[k - 1] * fact[m - k] for k in range(1, m + 1))
    ratio = np.array([wv / fv for wv, fv in zip(w, fact)])
    return DisjointPathTable(tuple(w), ratio)


@lru_cache(maxsize=4)
def disjoint_path_ratios(n_max: int) -> np.ndarray:
    """ratio[m] = w(m)/m! in floats for any m, via the normalized recursion
    1 = ratio[m] + sum_k ratio[k-1] / (k * C(m, k)), truncated where the
    weights 1/(k*C(m,k)) drop below 1e-22 (middle binomials are astronomical).
    """
    ratio = np.empty(n_max + 1)
    ratio[0] = 1.0
    for m in range(1, n_max + 1):
        acc = 0.0
        for k in range(1, m + 1):
            if 15 < k < m - 15 and m > 40:
                continue  # 1/(k*C(m,k)) far below double precision relevance
            acc += ratio[k - 1] / (k * math.comb(m, k))
        ratio[m] = 1.0 - acc
    return ratio


# ---------------------------------------------------------------------------
# Compositions.
# ---------------------------------------------------------------------------

def compositions(total: int, parts: int, min_part: int = 0):
    """Yield the ordered integer vectors with the given sum and part floor."""
    if parts < 1:
        raise ValueError("need at least one part")

    def rec(remaining, k, prefix):
        if k == 1:
            if remaining >= min_part:
                yield prefix + (remaining,)
            return
        for head in range(min_part, remaining - min_part * (k - 1) + 1):
            yield from rec(remaining - head, k - 1, prefix + (head,))

    yield from rec(total, parts, ())


def composition_count(total: int, parts: int, min_part: int = 0) -> int:
    """|compositions| = C(total - (min_part-1)*parts - 1, parts - 1), or 0."""
    top = total - (min_part - 1) * parts - 1
    if top < parts - 1:
        return 0
    return math.comb(top, parts - 1)


# ---------------------------------------------------------------------------
# Pair-class means.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapValue:
    """Mean count for one (s, g) class; value may be a proven upper bound."""

    s: int
    g: int
    value: float
    exactness: str  # "exact" or "upper_bound"
    fraction: Fraction | None = None  # populated in big-rational mode


def valid_class(n: int, s: int, g: int) -> bool:
    if s == n and g == 0:
        return True
    return 0 <= s <= n - 2 and 1 <= g <= min(s + 1, (n - s) // 2)


def _require_class(n: int, s: int, g: int):
    if not valid_class(n, s, g):
        raise ValueError(f"(s={s}, g={g}) invalid at n={n}")


def _log_comb(a: int, b: int) -> float:
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


@lru_cache(maxsize=8)
def _log_gap_weights(n: int) -> np.ndarray:
    """log(w(x) * C(2x, x)) for x = 2..n; -inf below 2 (gaps have length >= 2)."""
    ratio = disjoint_path_ratios(n)
    out = np.full(n + 1, -np.inf)
    for x in range(2, n + 1):
        out[x] = math.log(ratio[x]) + math.lgamma(x + 1) + _log_comb(2 * x, x)
    return out


def _log_convolve(a: np.ndarray, b: np.ndarray, n_max: int) -> np.ndarray:
    out = np.full(n_max + 1, -np.inf)
    for d in range(n_max + 1):
        lo = max(0, d - (len(b) - 1))
        seg = a[lo:d + 1] + b[d - lo::-1][: d + 1 - lo]
        if seg.size:
            m = seg.max()
            if m > -np.inf:
                out[d] = m + math.log(np.exp(seg - m).sum())
    return out


@lru_cache(maxsize=8)
def _log_power_table(n: int, g_max: int):
    """log coefficients of (sum_x gapweight(x) t^x)^g for g = 1..g_max."""
    h = _log_gap_weights(n)
    powers = [None, h]
    for _ in range(2, g_max + 1):
        powers.append(_log_convolve(powers[-1], h, n))
    return powers


def overlap_mean(n: int, s: int, g: int, budget: int = DEFAULT_BUDGET) -> OverlapValue:
    """Expected ordered pairs of accessible paths sharing s edges with g gaps.

    Exact (log-space, or big-rational for n <= 16) while the composition
    count of the class stays within budget; otherwise the proven upper bound
    is returned and flagged.
    """
    _require_class(n, s, g)
    if g == 0:
        one = Fraction(1)
        return OverlapValue(s, g, 1.0, "exact", one if n <= _EXACT_N else None)
    if composition_count(n - s, g, 2) > budget:
        return OverlapValue(s, g, overlap_mean_bound(n, s, g), "upper_bound")
    if n <= _EXACT_N:
        frac = _overlap_exact(n, s, g)
        return OverlapValue(s, g, float(frac), "exact", frac)
    if g == 1:
        log_sum = _log_gap_weights(n)[n - s]  # single composition (n - s,)
    else:
        powers = _log_power_table(n, max(2, (n + 1) // 3))  # covers every valid g
        log_sum = powers[g][n - s]
    log_val = _log_comb(s + 1, g) + math.lgamma(n + 1) - math.lgamma(2 * n - s + 1) + log_sum
    return OverlapValue(s, g, math.exp(log_val), "exact")


def _overlap_exact(n: int, s: int, g: int) -> Fraction:
    table = disjoint_path_table(max(n, 16)).exact
    total = 0
    for xs in compositions(n - s, g, 2):
        term = 1
        for x in xs:
            term *= table[x] * math.comb(2 * x, x)
        total += term
    return Fraction(math.comb(s + 1, g) * math.factorial(n) * total, math.factorial(2 * n - s))


def overlap_mean_bound(n: int, s: int, g: int) -> float:
    """Proven upper bound on the class mean, safe far beyond exact reach.

    Accepts any 0 <= s <= n-2 with g in [1, s+1]; outside the feasible class
    region the bound is simply slack, and at n - s - g <= 0 it degenerates
    to infinity.
    """
    if not (0 <= s <= n - 2 and 1 <= g <= s + 1):
        raise ValueError(f"(s={s}, g={g}) outside the bound's domain at n={n}")
    if n - s - g <= 0:
        return math.inf
    log_val = (
        _log_comb(2 * (n - s), n - s)
        - _log_comb(2 * n - s, n)
        + _log_comb(s + 1, g)
        + (g - 1) * math.log(2)
        - math.lgamma(g)
        - (g - 1) * math.log(n - s - g)
    )
    return math.exp(log_val)


def binomial_ratio_exponent(x: float) -> float:
    """Rate function f with C(2(n-s), n-s)/C(2n-s, n) ~ exp(-n f(s/n)).

    f(x) = log((2-x)^(2-x) / (4(1-x))^(1-x)) on [0, 1], continuous at 1.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("argument must lie in [0, 1]")
    if x == 1.0:
        return 0.0
    return (2 - x) * math.log(2 - x) - (1 - x) * math.log(4 * (1 - x))


# ---------------------------------------------------------------------------
# Aggregation.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecondMomentSummary:
    """Bracketed decomposition of E[X_n^2] over pair classes.

    single_gap_head/tail are exact (one composition per class).  multi_gap is
    an interval [exact part, exact part + bound remainder] covering classes
    with g >= 2.  The second-moment bracket adds 1 for the diagonal pairs.
    When no class fell back to its bound, lower == upper.
    """

    n: int
    k: int
    single_gap_head: float
    single_gap_tail: float
    multi_gap_low: float
    multi_gap_high: float
    second_moment_lower: float
    second_moment_upper: float
    truncated_classes: int
    exact_total: Fraction | None = None

    @property
    def collapsed(self) -> bool:
        return self.truncated_classes == 0


def second_moment_summary(n: int, k: int, budget: int = DEFAULT_BUDGET) -> SecondMomentSummary:
    """Split E[X_n^2] into head/tail single-gap sums and a multi-gap interval."""
    if not 1 <= k <= n - 2:
        raise ValueError(f"need 1 <= k <= n-2, got k={k} at n={n}")
    head = sum(overlap_mean(n, s, 1, budget).value for s in range(0, k + 1))
    tail = sum(overlap_mean(n, s, 1, budget).value for s in range(k + 1, n - 1))
    multi_low = 0.0
    multi_high = 0.0
    truncated = 0
    exact_total = Fraction(1) if n <= _EXACT_N else None
    for s in range(0, n - 1):
        for g in range(1, min(s + 1, (n - s) // 2) + 1):
            v = overlap_mean(n, s, g, budget)
            if exact_total is not None and v.fraction is not None:
                exact_total += v.fraction
            if g >= 2:
                if v.exactness == "exact":
                    multi_low += v.value
                    multi_high += v.value
                else:
                    truncated += 1
                    multi_high += v.value
            if exact_total is not None and v.fraction is None:
                exact_total = None
    lower = 1.0 + head + tail + multi_low
    upper = 1.0 + head + tail + multi_high
    return SecondMomentSummary(n, k, head, tail, multi_low, multi_high, lower, upper, truncated, exact_total)


def second_moment_exact(n: int) -> Fraction:
    """E[X_n^2] as an exact rational: 1 (diagonal) plus every class mean."""
    if n > _EXACT_N:
        raise ValueError(f"exact mode supported for n <= {_EXACT_N}")
    total = Fraction(1)
    for s in range(0, n - 1):
        for g in range(1, min(s + 1, (n - s) // 2) + 1):
            total += _overlap_exact(n, s, g)
    return total


def overlap_grid(n: int, budget: int = DEFAULT_BUDGET):
    """Rows (s, g, value, exactness) over every valid class; for CSV export."""
    rows = [(n, 0, 1.0, "exact")]
    for s in range(0, n - 1):
        for g in range(1, min(s + 1, (n - s) // 2) + 1):
            v = overlap_mean(n, s, g, budget)
            rows.append((s, g, v.value, v.exactness))
    return rows
