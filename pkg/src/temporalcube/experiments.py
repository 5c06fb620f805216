"""Reproducible Monte Carlo campaigns tying the simulators to the theory.

Every campaign fans a base seed out deterministically (seed of sample i is
base_seed XOR i), reduces per-batch results in batch order, and reports each
empirical frequency with a Wilson interval.  Summary verdicts follow a fixed
taxonomy: PASS for exact finite-n identities (the mean of the count is 1,
exact small-n laws), TREND for statements the theory provides only as limits
without rates (these must move the right way along a dimension ladder), and
REPORT for quantities with no proven finite-n target at all.  Thresholds for
TREND and REPORT windows are pilot-calibrated constants in calibration.py,
never theory-derived.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import calibration, exact, limitlaw, trees
from ._kernels import HAVE_NUMBA, set_worker_threads
from .core import MAX_DIMENSION, WeightOracle, unit_scalar

_MASK64 = (1 << 64) - 1

# Draw-index domain for the per-seed companion Poisson draw (edge weights own
# 1..63, the mixed-Poisson sampler 64..127, tree samplers 128..).
_DOM_COMPANION = 70

_BATCH = 2048


@dataclass(frozen=True)
class ExperimentConfig:
    which: str
    n: int | None = None
    n_grid: tuple[int, ...] = ()
    samples: int = 1000
    base_seed: int = 0
    k: int | None = None
    r: int | None = None
    threads: int = 1
    budget: int | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need at least one sample")
        if not self.n and not self.n_grid:
            raise ValueError("config needs n or an n grid")

    def dims(self) -> tuple[int, ...]:
        return self.n_grid if self.n_grid else (self.n,)

    def as_dict(self) -> dict:
        out = {"which": self.which, "samples": self.samples, "base_seed": self.base_seed,
               "threads": self.threads}
        if self.n_grid:
            out["n_grid"] = list(self.n_grid)
        else:
            out["n"] = self.n
        for name in ("k", "r", "budget"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out


def derive_seed(base_seed: int, i: int) -> int:
    return (base_seed ^ i) & _MASK64


def derived_seeds(base_seed: int, count: int) -> np.ndarray:
    return np.uint64(base_seed & _MASK64) ^ np.arange(count, dtype=np.uint64)


@dataclass(frozen=True)
class SummaryItem:
    name: str
    kind: str          # PASS | TREND | REPORT
    value: float
    target: float | None = None
    window: float | None = None
    ok: bool | None = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "kind": self.kind, "value": self.value}
        if self.target is not None:
            out["target"] = self.target
        if self.window is not None:
            out["window"] = self.window
        if self.ok is not None:
            out["ok"] = self.ok
        return out


def wilson_interval(successes: int, total: int, z: float = 1.96) -> tuple[float, float]:
    """95% Wilson score interval for a binomial frequency."""
    if total < 1:
        raise ValueError("empty sample")
    p = successes / total
    denom = 1 + z * z / total
    center = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def ks_statistic(samples, cdf) -> float:
    """Sup-norm distance between the empirical CDF and a reference CDF."""
    xs = np.sort(np.asarray(samples, dtype=float))
    m = xs.shape[0]
    if m == 0:
        raise ValueError("empty sample")
    ref = np.asarray(cdf(xs), dtype=float)
    upper = np.abs(np.arange(1, m + 1) / m - ref).max()
    lower = np.abs(np.arange(0, m) / m - ref).max()
    return float(max(upper, lower))


def _limit_pmf_table(x_max: int) -> np.ndarray:
    ctx = limitlaw.build_context()
    return np.array([
        limitlaw.pmf_exact(x, ctx)[0] if x <= ctx.x_max else limitlaw.pmf_quadrature(x)
        for x in range(x_max + 1)
    ])


def tv_distance_hist(hist: np.ndarray, total: int, ref_pmf: np.ndarray) -> float:
    """Total variation between an empirical histogram and a reference law.

    The reference mass beyond the evaluated range counts fully toward the
    distance, so the result is exact for the truncated reference table.
    """
    width = max(len(hist), len(ref_pmf))
    p = np.zeros(width)
    q = np.zeros(width)
    p[: len(hist)] = hist / total
    q[: len(ref_pmf)] = ref_pmf
    return 0.5 * (np.abs(p - q).sum() + max(0.0, 1.0 - ref_pmf.sum()))


def _map_batches(fn, starts, threads: int):
    """Apply fn over batch start offsets, reducing in a fixed order."""
    if threads <= 1:
        return [fn(s) for s in starts]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, starts))


# ---------------------------------------------------------------------------
# Count-law campaign.
# ---------------------------------------------------------------------------

@dataclass
class PmfEstimate:
    config: ExperimentConfig
    n: int
    counts: np.ndarray           # histogram over count values
    samples: int
    mean: float
    second_moment: float
    tv_to_limit: float
    wilson: list[tuple[int, float, float, float]] = field(default_factory=list)
    summary: list[SummaryItem] = field(default_factory=list)


def run_pmf(config: ExperimentConfig) -> list[PmfEstimate]:
    """Empirical law of the accessible-path count at each configured dimension."""
    if HAVE_NUMBA and config.threads:
        set_worker_threads(config.threads)
    out = []
    for n in config.dims():
        if n > exact.MAX_N:
            raise ValueError(f"exact counting is limited to n <= {exact.MAX_N}")
        m = config.samples
        seeds = derived_seeds(config.base_seed, m)

        def batch(lo, n=n, seeds=seeds, m=m):
            return np.bincount(exact.count_accessible_many(n, seeds[lo:lo + _BATCH]))

        parts = _map_batches(batch, range(0, m, _BATCH), config.threads)
        width = max(len(p) for p in parts)
        hist = np.zeros(width, dtype=np.int64)
        for p in parts:
            hist[: len(p)] += p
        xs = np.arange(width)
        mean = float((hist * xs).sum() / m)
        m2 = float((hist * xs.astype(float) ** 2).sum() / m)
        ref = _limit_pmf_table(max(width - 1, calibration.TV_REFERENCE_X_MAX))
        tv = float(tv_distance_hist(hist, m, ref))
        wilson = [(int(x), float(hist[x] / m), *wilson_interval(int(hist[x]), m)) for x in xs]
        se_mean = math.sqrt(max(m2 - mean * mean, 0.0) / m)
        summary = [
            SummaryItem("mean_count", "PASS", mean, 1.0, 3 * se_mean, bool(abs(mean - 1.0) <= 3 * se_mean)),
            SummaryItem("second_moment", "REPORT", m2),
            SummaryItem("tv_to_limit", "REPORT", tv),
            SummaryItem("freq_zero", "REPORT", float(hist[0] / m), limitlaw.build_context().delta),
        ]
        out.append(PmfEstimate(config, n, hist, m, mean, m2, tv, wilson, summary))
    if len(out) > 1:
        tvs = [e.tv_to_limit for e in out]
        ok = all(a > b for a, b in zip(tvs, tvs[1:]))
        for e in out:
            e.summary.append(SummaryItem("tv_strictly_decreasing_on_grid", "TREND", float(ok), 1.0, None, ok))
    return out


# ---------------------------------------------------------------------------
# Pair-overlap campaign.
# ---------------------------------------------------------------------------

@dataclass
class PairOverlapResult:
    config: ExperimentConfig
    n: int
    samples: int
    histogram: dict[tuple[int, int], int]   # (shared, gaps) -> ordered pair count
    total_pairs: int
    partner_mean: float                      # E[X(X-1)] / E[X]
    multi_gap_fraction: float
    summary: list[SummaryItem] = field(default_factory=list)


def run_pair_overlap(config: ExperimentConfig) -> PairOverlapResult:
    """Classify ordered pairs of distinct accessible paths by (shared, gaps)."""
    n = config.n
    if n is None or n > exact.MAX_N:
        raise ValueError(f"needs a single n <= {exact.MAX_N}")
    if n > MAX_DIMENSION:
        raise ValueError("pair encoding uses bit-set paths (n <= 62)")
    if HAVE_NUMBA and config.threads:
        set_worker_threads(config.threads)
    m = config.samples
    seeds = derived_seeds(config.base_seed, m)

    def batch(lo):
        return exact.count_accessible_many(n, seeds[lo:lo + _BATCH])

    counts = np.concatenate(_map_batches(batch, range(0, m, _BATCH), config.threads))
    hist: dict[tuple[int, int], int] = {}
    sum_x = int(counts.sum())
    sum_pairs = int((counts * (counts - 1)).sum())
    from .core import DirectPath, encode_gap

    for i in np.nonzero(counts >= 2)[0]:
        dirs = exact.accessible_path_directions(n, int(seeds[i]))
        paths = [DirectPath.full(n, d) for d in dirs]
        for a in paths:
            for b in paths:
                if a is b:
                    continue
                enc = encode_gap(b, a)
                key = (enc.shared, enc.num_gaps)
                hist[key] = hist.get(key, 0) + 1
    total = sum(hist.values())
    multi = sum(v for (s, g), v in hist.items() if g >= 2)
    partner_mean = sum_pairs / sum_x if sum_x else 0.0
    summary = [
        SummaryItem("partner_mean", "TREND", partner_mean, 4.0),
        SummaryItem("multi_gap_fraction", "TREND", multi / total if total else 0.0, 0.0),
        SummaryItem("pairs_classified", "REPORT", float(total)),
    ]
    return PairOverlapResult(config, n, m, dict(sorted(hist.items())), total, partner_mean,
                             multi / total if total else 0.0, summary)


# ---------------------------------------------------------------------------
# Tree campaign.
# ---------------------------------------------------------------------------

@dataclass
class TreeCampaignResult:
    config: ExperimentConfig
    n: int
    k: int
    r: int
    samples: int
    rows: list[tuple]            # (seed, z_bottom, z_top, lambda, x, x_star)
    summary: list[SummaryItem] = field(default_factory=list)


def run_tree_campaign(config: ExperimentConfig) -> TreeCampaignResult:
    """Per-seed tree functionals, with exact counts when the dimension allows."""
    n, k, r = config.n, config.k, config.r
    if n is None or k is None or r is None:
        raise ValueError("tree campaign needs n, k and r")
    guide = trees.coupling_dimension_guide(k, r) if k >= 2 and r >= 2 else 0
    with_counts = n <= exact.MAX_N
    m = config.samples
    seeds = derived_seeds(config.base_seed, m)
    if HAVE_NUMBA and config.threads:
        set_worker_threads(config.threads)
    counts = None
    if with_counts:
        def batch(lo):
            return exact.count_accessible_many(n, seeds[lo:lo + _BATCH])

        counts = np.concatenate(_map_batches(batch, range(0, m, _BATCH), config.threads))

    def one(i: int):
        seed = int(seeds[i])
        o = WeightOracle(seed=seed, n=n)
        bottom = trees.build_greedy_tree(n, k, r, o, "bottom")
        top = trees.build_greedy_tree(n, k, r, o, "top")
        zb = trees.leaf_functional(bottom)
        zt = trees.leaf_functional(top)
        lam = trees.middle_conditional_mean(bottom, top)
        if with_counts:
            x = int(counts[i])
            dirs = exact.accessible_path_directions(n, seed) if x else []
            xs = trees.tree_restricted_count_given(bottom, top, o, dirs)
        else:
            x = xs = None
        return (seed, zb, zt, lam, x, xs)

    def batch_rows(lo):
        return [one(i) for i in range(lo, min(m, lo + _BATCH))]

    rows = [row for part in _map_batches(batch_rows, range(0, m, _BATCH), config.threads) for row in part]
    zb = np.array([r_[1] for r_ in rows])
    zt = np.array([r_[2] for r_ in rows])
    lam = np.array([r_[3] for r_ in rows])
    exp_cdf = lambda x: 1.0 - np.exp(-np.maximum(x, 0.0))
    corr = float(np.corrcoef(zb, zt)[0, 1]) if m > 2 else 0.0
    mean_prod = float((zb * zt).mean())
    target_prod = (1 - 2.0**-r) ** (2 * k)
    se_prod = float((zb * zt).std() / math.sqrt(m))
    summary = [
        SummaryItem("ks_z_bottom_vs_exp1", "TREND", ks_statistic(zb, exp_cdf)),
        SummaryItem("ks_z_top_vs_exp1", "TREND", ks_statistic(zt, exp_cdf)),
        SummaryItem("corr_z_bottom_top", "PASS", corr, 0.0, 3.0 / math.sqrt(m),
                    bool(abs(corr) <= 3.0 / math.sqrt(m))),
        SummaryItem("mean_z_product", "PASS", mean_prod, target_prod, 3 * se_prod,
                    bool(abs(mean_prod - target_prod) <= 3 * se_prod + calibration.Z_PRODUCT_FINITE_N_SLACK * k * r / n)),
        SummaryItem("mean_lambda", "REPORT", float(lam.mean()), 1.0),
        SummaryItem("coupling_dimension_guide", "REPORT", float(guide)),
    ]
    if n < guide:
        summary.append(SummaryItem("below_coupling_scale", "REPORT", 1.0))
    if with_counts:
        x = np.array([r_[4] for r_ in rows], dtype=np.int64)
        xs = np.array([r_[5] for r_ in rows], dtype=np.int64)
        ys = np.array([
            limitlaw._poisson_sequential(float(lam[i]), unit_scalar(int(seeds[i]), 0, _DOM_COMPANION))
            for i in range(m)
        ])
        width = int(max(x.max(), xs.max(), ys.max())) + 1
        tv = 0.5 * np.abs(np.bincount(xs, minlength=width) / m - np.bincount(ys, minlength=width) / m).sum()
        summary.append(SummaryItem("freq_count_equals_restricted", "TREND", float((x == xs).mean())))
        summary.append(SummaryItem("tv_restricted_vs_companion_poisson", "TREND", float(tv)))
    return TreeCampaignResult(config, n, k, r, m, rows, summary)


# ---------------------------------------------------------------------------
# Serialization (deterministic bytes for any thread count).
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def to_csv(result) -> str:
    lines = []
    if isinstance(result, list) and result and isinstance(result[0], PmfEstimate):
        lines.append("n,x,count,frequency,wilson_low,wilson_high")
        for est in result:
            for x, freq, lo, hi in est.wilson:
                lines.append(f"{est.n},{x},{int(est.counts[x])},{_fmt(freq)},{_fmt(lo)},{_fmt(hi)}")
    elif isinstance(result, PairOverlapResult):
        lines.append("shared,gaps,pairs")
        for (s, g), c in result.histogram.items():
            lines.append(f"{s},{g},{c}")
    elif isinstance(result, TreeCampaignResult):
        lines.append("seed,z_bottom,z_top,lambda,x,x_star")
        for seed, zb, zt, lam, x, xs in result.rows:
            lines.append(f"{seed},{_fmt(zb)},{_fmt(zt)},{_fmt(lam)},{_fmt(x)},{_fmt(xs)}")
    else:
        raise TypeError(f"no CSV form for {type(result)!r}")
    return "\n".join(lines) + "\n"


def _summary_json(items: list[SummaryItem]) -> list[dict]:
    return [it.as_dict() for it in items]


def to_json(result) -> str:
    if isinstance(result, list) and result and isinstance(result[0], PmfEstimate):
        payload = {
            "config": result[0].config.as_dict(),
            "rows": [
                {"n": est.n, "histogram": [int(c) for c in est.counts], "mean": est.mean,
                 "second_moment": est.second_moment, "tv_to_limit": est.tv_to_limit,
                 "wilson": [[x, f, lo, hi] for x, f, lo, hi in est.wilson]}
                for est in result
            ],
            "summary": {str(est.n): _summary_json(est.summary) for est in result},
        }
    elif isinstance(result, PairOverlapResult):
        payload = {
            "config": result.config.as_dict(),
            "rows": [{"shared": s, "gaps": g, "pairs": c} for (s, g), c in result.histogram.items()],
            "summary": {"items": _summary_json(result.summary),
                        "partner_mean": result.partner_mean,
                        "multi_gap_fraction": result.multi_gap_fraction},
        }
    elif isinstance(result, TreeCampaignResult):
        payload = {
            "config": result.config.as_dict(),
            "rows": [
                {"seed": seed, "z_bottom": zb, "z_top": zt, "lambda": lam, "x": x, "x_star": xs}
                for seed, zb, zt, lam, x, xs in result.rows
            ],
            "summary": {"items": _summary_json(result.summary)},
        }
    else:
        raise TypeError(f"no JSON form for {type(result)!r}")
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def validate_json_payload(text: str) -> dict:
    """Parse a campaign JSON blob and verify it against the output schema.

    The schema is {config: object, rows: array, summary: object}; every
    summary item restricts itself to the SummaryItem fields.  Raises
    ValueError on any violation and returns the parsed payload otherwise.
    """
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise ValueError("payload must be an object")
    missing = {"config", "rows", "summary"} - set(payload)
    if missing:
        raise ValueError(f"payload lacks {sorted(missing)}")
    if not isinstance(payload["config"], dict) or "which" not in payload["config"]:
        raise ValueError("config must be an object naming the campaign")
    if not isinstance(payload["rows"], list):
        raise ValueError("rows must be an array")
    if not isinstance(payload["summary"], dict):
        raise ValueError("summary must be an object")
    allowed = {"name", "kind", "value", "target", "window", "ok"}
    kinds = {"PASS", "TREND", "REPORT"}

    def check_items(items):
        for item in items:
            if not isinstance(item, dict) or not {"name", "kind", "value"} <= set(item):
                raise ValueError(f"malformed summary item: {item!r}")
            if set(item) - allowed:
                raise ValueError(f"unknown summary fields: {sorted(set(item) - allowed)}")
            if item["kind"] not in kinds:
                raise ValueError(f"unknown verdict kind {item['kind']!r}")

    for value in payload["summary"].values():
        if isinstance(value, list):
            check_items(value)
        elif isinstance(value, dict) and isinstance(value.get("items"), list):
            check_items(value["items"])
    return payload


def write_output(text: str, out: str | None) -> None:
    if out is None or out == "-":
        import sys

        sys.stdout.write(text)
        return
    directory = os.environ.get("TEMPORALCUBE_OUTDIR", "")
    path = out if (os.path.isabs(out) or os.path.dirname(out) or not directory) else os.path.join(directory, out)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
