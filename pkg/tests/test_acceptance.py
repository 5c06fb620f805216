"""Acceptance criteria, one test per criterion.

Each test prints one `ACCEPTANCE <id>: PASS|FAIL` line (visible with -s, or
in the captured output on failure) and then asserts.  Four checks encode
stated finite-size targets that this package's own exact machinery shows to
be unreachable; they are implemented faithfully, fail honestly, and carry
the quantitative analysis in their assertion messages:

* criterion 2, the x=300 tail entry: three independent evaluation routes
  (adaptive quadrature, a 2-D mixed integral, and the exact alternating sum
  at 600-digit precision) all give 6.10383e-16, not the stated 5.97185e-16;
* criterion 9: the law of the count moves away from the limit over
  dimensions 6 -> 14 (its exact second moment rises 4.020 -> 5.649 -> 6.097,
  overshooting the limiting value 5 and peaking near n = 14..16 before the
  slow decay back), so total variation increases on that ladder and the
  zero-frequency overshoots the Gompertz constant;
* criterion 10, the MGF window: the idealized functional converges like
  k^(-0.0397), so its mean is ~0.455 at depth 12 and the empirical MGF at
  t = 1/2 sits near 1.295; no feasible depth reaches the limit value 2;
* criterion 11, the two improvement trends: at fixed tree shape (k=2, r=2)
  the agreement frequency and the companion-Poisson distance are flat in the
  dimension (measured differences -0.001 and +0.003 at 3e4 seeds), so a
  strict improvement over 12 -> 16 is noise, not signal.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from temporalcube import exact, experiments, limitlaw, pairs, trees
from temporalcube.core import WeightOracle
from temporalcube.experiments import ExperimentConfig


def verdict(cid: str, ok: bool, detail: str, budget_s: float, elapsed: float) -> str:
    state = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {cid}: {state} [{elapsed:.1f}s / budget {budget_s:.0f}s] {detail}"
    print(line)
    return line


def test_criterion_01_pmf_exact_coefficients_and_decimals(limit_ctx):
    t0 = time.time()
    coeffs = [(Fraction(1), Fraction(0)), (Fraction(2), Fraction(-1)),
              (Fraction(7, 2), Fraction(-2)), (Fraction(17, 3), Fraction(-10, 3)),
              (Fraction(209, 24), Fraction(-31, 6)), (Fraction(773, 60), Fraction(-23, 3))]
    decimals = [0.596347, 0.192695, 0.087216, 0.045968, 0.026525, 0.016275]
    ok = True
    for x in range(6):
        value, a, b = limitlaw.pmf_exact(x, limit_ctx)
        ok &= (a, b) == coeffs[x] and f"{value:.6f}" == f"{decimals[x]:.6f}"
    elapsed = time.time() - t0
    line = verdict("1", ok and elapsed < 1.0, "coefficient pairs and 6-place decimals", 1, elapsed)
    assert ok and elapsed < 1.0, line


def test_criterion_02_pmf_quadrature_tail():
    t0 = time.time()
    stated = {100: 1.78264e-9, 200: 3.85980e-13, 300: 5.97185e-16}
    got = {x: limitlaw.pmf_quadrature(x) for x in stated}
    rel = {x: abs(got[x] - stated[x]) / stated[x] for x in stated}
    ok = all(r < 1e-4 for r in rel.values())
    elapsed = time.time() - t0
    detail = " ".join(f"x={x}:{got[x]:.6e}(rel {rel[x]:.1e})" for x in sorted(got))
    line = verdict("2", ok and elapsed < 1.0, detail, 1, elapsed)
    assert ok and elapsed < 1.0, (
        line + " | the x=300 target is not reproducible by any correct evaluation: "
        "adaptive quadrature, the 2-D mixed-Poisson integral, and the exact "
        "alternating sum at 600-digit precision all give 6.103825723e-16"
    )


def test_criterion_03_moment_identities_with_monte_carlo():
    t0 = time.time()
    ok = limitlaw.moment(1) == 1 and limitlaw.moment(2) == 5 and limitlaw.moment(3) == 49
    total = 10**8
    chunk = 1 << 23
    s3 = s6 = 0.0
    for lo in range(0, total, chunk):
        x = limitlaw.sample_batch(0, min(chunk, total - lo), start_index=lo).astype(float)
        s3 += (x**3).sum()
        s6 += (x**6).sum()
    mean3 = s3 / total
    se3 = math.sqrt(max(s6 / total - mean3**2, 0.0) / total)
    ok &= abs(mean3 - 49.0) <= 3 * se3
    elapsed = time.time() - t0
    line = verdict("3", ok and elapsed < 120, f"m1=1 m2=5 m3=49; MC third moment {mean3:.3f} +- {se3:.3f}", 120, elapsed)
    assert ok and elapsed < 120, line


def test_criterion_04_second_moment_oracle_equivalence():
    t0 = time.time()
    ok = True
    for n in (2, 3, 4, 5):
        ok &= pairs.second_moment_exact(n) == exact.second_moment_bruteforce(n)
    ok &= pairs.second_moment_exact(2) == Fraction(3, 2)
    elapsed = time.time() - t0
    line = verdict("4", ok and elapsed < 300, "exact rational equality at n=2..5", 300, elapsed)
    assert ok and elapsed < 300, line


def test_criterion_05_joint_probability_oracle():
    import itertools

    from temporalcube.core import DirectPath, encode_gap

    t0 = time.time()
    ok = True
    for n in (2, 3, 4, 5):
        paths = [DirectPath.full(n, p) for p in itertools.permutations(range(1, n + 1))]
        for a in paths:
            for b in paths:
                ok &= exact.joint_accessibility(encode_gap(a, b), n) == exact.joint_accessibility_bruteforce(a, b)
        if not ok:
            break
    elapsed = time.time() - t0
    line = verdict("5", ok and elapsed < 600, "formula == ordering oracle on every ordered pair, n <= 5", 600, elapsed)
    assert ok and elapsed < 600, line


def test_criterion_06_class_sums_at_desk_scale():
    t0 = time.time()
    sm = pairs.second_moment_summary(200, 20)
    ok = 3.9 < sm.single_gap_head < 4.1
    ok &= sm.single_gap_tail + sm.multi_gap_high < 0.05
    ok &= 4.8 < sm.second_moment_lower and sm.second_moment_upper < 5.2
    elapsed = time.time() - t0
    detail = (f"head={sm.single_gap_head:.4f} tail+multi={sm.single_gap_tail + sm.multi_gap_high:.4f} "
              f"bracket=[{sm.second_moment_lower:.4f},{sm.second_moment_upper:.4f}]")
    line = verdict("6", ok and elapsed < 60, detail, 60, elapsed)
    assert ok and elapsed < 60, line


def test_criterion_07_dp_equals_bruteforce():
    t0 = time.time()
    ok = True
    for n in range(2, 9):
        seeds = experiments.derived_seeds(0, 1000)
        ok &= bool(np.array_equal(
            exact.count_accessible_many(n, seeds),
            exact.count_accessible_bruteforce_batch(n, seeds),
        ))
    elapsed = time.time() - t0
    line = verdict("7", ok and elapsed < 60, "1000 seeds per dimension, exact equality", 60, elapsed)
    assert ok and elapsed < 60, line


def test_criterion_08_exact_small_law():
    t0 = time.time()
    m = 10**6
    counts = exact.count_accessible_many(2, experiments.derived_seeds(0, m))
    hist = np.bincount(counts, minlength=3)
    ok = True
    for x, p in [(0, 0.25), (1, 0.5), (2, 0.25)]:
        sigma = math.sqrt(p * (1 - p) / m)
        ok &= abs(hist[x] / m - p) <= 3 * sigma
    elapsed = time.time() - t0
    detail = "freqs " + " ".join(f"{hist[x] / m:.5f}" for x in range(3))
    line = verdict("8", ok and elapsed < 60, detail, 60, elapsed)
    assert ok and elapsed < 60, line


def test_criterion_09_distributional_convergence_trend(limit_ctx):
    t0 = time.time()
    cfg = ExperimentConfig("simulate", n_grid=(6, 10, 14), samples=10**5, base_seed=0, threads=2)
    ests = experiments.run_pmf(cfg)
    tvs = [e.tv_to_limit for e in ests]
    p0 = ests[-1].counts[0] / ests[-1].samples
    strictly_decreasing = all(a > b for a, b in zip(tvs, tvs[1:]))
    near_delta = abs(p0 - limit_ctx.delta) < 0.05
    ok = strictly_decreasing and near_delta
    elapsed = time.time() - t0
    detail = f"TV={['%.4f' % t for t in tvs]} P(X_14=0)={p0:.4f} delta={limit_ctx.delta:.4f}"
    line = verdict("9", ok and elapsed < 1800, detail, 1800, elapsed)
    assert ok and elapsed < 1800, (
        line + " | convergence of the count law is not monotone at desk scale: the exact "
        "second moments rise through the limiting value 5 on this ladder and peak "
        "right at its top (4.020 at n=6, 5.649 at n=10, 6.097 at n=14, 6.086 at "
        "n=16, 5.908 at n=20, 5.215 at n=50, decreasing toward 5), so both stated "
        "targets are unreachable"
    )


def test_criterion_10_tree_functionals():
    t0 = time.time()
    n, k, r, m = 2000, 3, 3, 10**4
    vals = np.empty(m)
    for i in range(m):
        o = WeightOracle(seed=experiments.derive_seed(0, i), n=n)
        vals[i] = trees.leaf_functional(trees.build_greedy_tree(n, k, r, o, "bottom"))
    target = (1 - 2.0**-r) ** k
    se = vals.std() / math.sqrt(m)
    mean_ok = abs(vals.mean() - target) <= 3 * se

    ks = []
    for kk in (6, 12, 24):
        z = trees.ideal_functional_population(kk, trees.default_branching(kk), count=10**5, seed=0)
        xs = np.sort(z)
        cdf = 1 - np.exp(-xs)
        ks.append(float(max(np.abs(np.arange(1, xs.size + 1) / xs.size - cdf).max(),
                            np.abs(np.arange(xs.size) / xs.size - cdf).max())))
    ladder_ok = ks[0] > ks[1] > ks[2]

    z12 = trees.ideal_functional_population(12, trees.default_branching(12), count=10**5, seed=0)
    mgf = np.exp(0.5 * z12)
    mgf_mean = float(mgf.mean())
    mgf_se = float(mgf.std() / math.sqrt(mgf.size))
    mgf_ok = abs(mgf_mean - 2.0) <= 3 * mgf_se

    ok = mean_ok and ladder_ok and mgf_ok
    elapsed = time.time() - t0
    detail = (f"mean={vals.mean():.4f} (target {target:.4f}, 3se {3 * se:.4f}); "
              f"KS ladder={['%.4f' % v for v in ks]}; MGF(1/2)={mgf_mean:.4f} +- {mgf_se:.4f}")
    line = verdict("10", ok and elapsed < 900, detail, 900, elapsed)
    assert ok and elapsed < 900, (
        line + " | the MGF window is unreachable: the idealized functional's mean is "
        "(1 - 2^-r(k))^k = k^(-0.0397(1+o(1))) ~ 0.455 at depth 12 and its "
        "convergence exponent makes E[exp(Z/2)] ~ 1.295 at every feasible depth; "
        "even exact unit-exponential samples fail this window since exp(Z/2) "
        "has infinite variance"
    )


def test_criterion_11_restricted_count_structure():
    t0 = time.time()
    rows = {}
    for n in (12, 16):
        cfg = ExperimentConfig("tree", n=n, k=2, r=2, samples=8000, base_seed=0, threads=2)
        res = experiments.run_tree_campaign(cfg)
        items = {s.name: s.value for s in res.summary}
        rows[n] = (items["freq_count_equals_restricted"],
                   items["tv_restricted_vs_companion_poisson"],
                   items["mean_lambda"])
    freq_improves = rows[16][0] > rows[12][0]
    tv_improves = rows[16][1] < rows[12][1]
    from temporalcube import calibration

    lambda_ok = abs(rows[16][2] - 1.0) <= calibration.LAMBDA_MEAN_WINDOW
    ok = freq_improves and tv_improves and lambda_ok
    elapsed = time.time() - t0
    detail = (f"freq {rows[12][0]:.4f}->{rows[16][0]:.4f}; TV {rows[12][1]:.4f}->{rows[16][1]:.4f}; "
              f"E[lambda]={rows[16][2]:.4f}")
    line = verdict("11", ok and elapsed < 1800, detail, 1800, elapsed)
    assert ok and elapsed < 1800, (
        line + " | at fixed tree shape (k=2, r=2) both quantities converge to "
        "shape-limited constants rather than improving in the dimension: measured "
        "differences at 3e4 seeds are -0.001 (frequency) and +0.003 (distance), "
        "both within sampling noise of zero"
    )


def test_criterion_12_campaign_determinism(tmp_path):
    t0 = time.time()
    ok = True
    jobs = [
        ["simulate", "--n", "6", "--samples", "500", "--seed", "11"],
        ["tree", "--n", "12", "--k", "2", "--r", "2", "--samples", "50", "--seed", "11"],
    ]
    for j, cmd in enumerate(jobs):
        blobs = []
        for threads in ("1", "2", "3"):
            out = tmp_path / f"job{j}_t{threads}"
            proc = subprocess.run(
                [sys.executable, "-m", "temporalcube.cli", *cmd, "--threads", threads, "--out", str(out)],
                capture_output=True, text=True, timeout=600,
            )
            ok &= proc.returncode == 0
            blobs.append(out.read_bytes())
        ok &= blobs[0] == blobs[1] == blobs[2]
    elapsed = time.time() - t0
    line = verdict("12", ok, "byte-identical outputs for threads 1, 2, 3", 600, elapsed)
    assert ok, line
