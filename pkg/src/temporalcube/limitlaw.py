"""The limiting law of the accessible-path count.

The count converges in distribution to a mixed Poisson variable whose random
mean is the product of two independent unit-rate exponentials.  Its mass
function is an exact rational combination of the Gompertz constant

    delta = integral_0^inf exp(-z) / (1 + z) dz ~ 0.596347...

via the negative moments m_k = E[(1+Z)^-k], which obey m_1 = delta and
m_{k+1} = (1 - m_k) / k.  Three independent evaluation routes are provided:
exact coefficient pairs (A_x, B_x) with P(X = x) = A_x * delta + B_x for
x <= 30, adaptive Gauss-Kronrod quadrature of the integral form for any x,
and a seeded Monte Carlo sampler of the mixed Poisson law itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .core import seed_state, unit_from_state, unit_scalar

PMF_EXACT_MAX_X = 30  # alternating sum cancels catastrophically beyond this
_DELTA_DIGITS = 40

# The sampler owns the single draw tag 64 (edge weights use 1..63, other
# consumers 65 and up); all of a sample's draws pack into the payload as
# (sample index << 13) | slot, with slot 0 for Z, 1 for Z', 2 for the
# inversion uniform and 3.. for rejection retries (capped well below 2^13).
_DOM_SAMPLER = 64
_SLOT_Z = 0
_SLOT_ZPRIME = 1
_SLOT_INVERSION = 2
_SLOT_REJECTION = 3
_MAX_REJECTION_SLOT = (1 << 13) - 2
_POISSON_SEQUENTIAL_MAX = 30.0


def _draw(seed: int, index: int, slot: int) -> float:
    return unit_scalar(seed, (index << 13) | slot, _DOM_SAMPLER)


def gompertz_delta(digits: int = 30) -> mpmath.mpf:
    """The Gompertz constant by adaptive quadrature, to the requested digits.

    The substitution z = t/(1-t) maps the integral to [0, 1); the transformed
    integrand exp(-t/(1-t)) / (1-t) decays to 0 at the right endpoint.
    """
    if not 1 <= digits <= 50:
        raise ValueError("supported precision is 1..50 digits")
    with mpmath.workdps(digits + 15):
        val = mpmath.quad(lambda t: mpmath.exp(-t / (1 - t)) / (1 - t), [0, 1])
        return +val


@lru_cache(maxsize=4)
def _delta_hp() -> mpmath.mpf:
    return gompertz_delta(_DELTA_DIGITS)


@dataclass(frozen=True)
class LimitLawContext:
    """Gompertz constant, negative moments, and exact PMF coefficient pairs."""

    delta: float
    m: tuple[float, ...]  # m[k-1] = E[(1+Z)^-k]
    coeffs: tuple[tuple[Fraction, Fraction], ...]  # (A_x, B_x) for x = 0..x_max

    @property
    def x_max(self) -> int:
        return len(self.coeffs) - 1


@lru_cache(maxsize=2)
def build_context(x_max: int = PMF_EXACT_MAX_X) -> LimitLawContext:
    if x_max > PMF_EXACT_MAX_X:
        raise ValueError(f"exact coefficients supported for x <= {PMF_EXACT_MAX_X}")
    delta = _delta_hp()
    # m_k = alpha[k-1] * delta + beta[k-1] as exact rationals; m_1 = delta and
    # m_{k+1} = (1 - m_k) / k drive the recursion.
    alpha = [Fraction(1)]
    beta = [Fraction(0)]
    for k in range(1, x_max + 2):
        alpha.append(-alpha[-1] / k)
        beta.append((1 - beta[-1]) / k)
    with mpmath.workdps(_DELTA_DIGITS):
        m = tuple(float(alpha[i] * delta + beta[i]) for i in range(x_max + 2))
    coeffs = []
    for x in range(x_max + 1):
        a = sum(Fraction(math.comb(x, k) * (-1) ** k) * alpha[k] for k in range(x + 1))
        b = sum(Fraction(math.comb(x, k) * (-1) ** k) * beta[k] for k in range(x + 1))
        coeffs.append((a, b))
    return LimitLawContext(float(delta), m, tuple(coeffs))


def pmf_exact(x: int, ctx: LimitLawContext | None = None) -> tuple[float, Fraction, Fraction]:
    """P(X = x) plus its exact coefficient pair (A_x, B_x) in A_x*delta + B_x."""
    if ctx is None:
        ctx = build_context()
    if not 0 <= x <= ctx.x_max:
        raise ValueError(f"exact mode supports 0 <= x <= {ctx.x_max}")
    a, b = ctx.coeffs[x]
    with mpmath.workdps(_DELTA_DIGITS):
        val = float(mpmath.mpf(a.numerator) / a.denominator * _delta_hp() + mpmath.mpf(b.numerator) / b.denominator)
    return val, a, b


def negative_moment(k: int, ctx: LimitLawContext | None = None) -> float:
    """m_k = E[(1+Z)^-k] for Z ~ Exp(1)."""
    if ctx is None:
        ctx = build_context()
    if not 1 <= k <= len(ctx.m):
        raise ValueError(f"moments available for 1 <= k <= {len(ctx.m)}")
    return ctx.m[k - 1]


# ---------------------------------------------------------------------------
# Quadrature route: P(X = x) = integral of z^x / (1+z)^(x+1) * exp(-z).
# ---------------------------------------------------------------------------

# 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point Gauss rule.
_KRONROD_X = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_KRONROD_W = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_W = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _log_integrand(x: int, t: np.ndarray) -> np.ndarray:
    """log of z^x (1+z)^-(x+1) e^-z / (1-t)^2 with z = t/(1-t), elementwise."""
    t = np.asarray(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = t / (1.0 - t)
        out = np.where(
            (t >= 1.0) | ((t <= 0.0) & (x > 0)),
            -np.inf,
            (x * np.log(np.where(z > 0, z, 1.0)) if x else 0.0)
            - (x + 1) * np.log1p(z)
            - z
            - 2.0 * np.log1p(-np.where(t < 1.0, t, 0.0)),
        )
    return out


def _panel(x: int, a: float, b: float, scale: float) -> tuple[float, float]:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    f = np.exp(_log_integrand(x, mid + half * _KRONROD_X) - scale)
    k15 = half * float(_KRONROD_W @ f)
    g7 = half * float(_GAUSS_W @ f[1::2])
    return k15, abs(k15 - g7)


def pmf_quadrature(x: int, rel_tol: float = 1e-10) -> float:
    """P(X = x) by adaptive Gauss-Kronrod panels on the transformed interval.

    The integrand is evaluated in log space against its peak value, so the
    result keeps uniform relative accuracy across hundreds of orders of
    magnitude.  Guaranteed relative error well below 1e-6 for x up to a few
    thousand (values underflow doubles around x ~ 5e4).
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    z_peak = math.sqrt(x + 1.0) - 1.0
    t_peak = z_peak / (1.0 + z_peak)
    scale = float(_log_integrand(x, np.array(t_peak)))
    pts = sorted({0.0, 0.25, 0.5, 0.75, max(t_peak * 0.5, 1e-3), t_peak, min(1.0, t_peak * 1.5 + 1e-3), 1.0})
    first = sum(_panel(x, a, b, scale)[0] for a, b in zip(pts[:-1], pts[1:]))
    tol_abs = rel_tol * max(first, 1e-300)

    def refine(a: float, b: float, budget: float, depth: int) -> float:
        val, err = _panel(x, a, b, scale)
        if err <= budget or depth >= 40 or b - a < 1e-14:
            return val
        mid = 0.5 * (a + b)
        return refine(a, mid, budget / 2, depth + 1) + refine(mid, b, budget / 2, depth + 1)

    npanels = len(pts) - 1
    total = sum(refine(a, b, tol_abs / npanels, 0) for a, b in zip(pts[:-1], pts[1:]))
    return math.exp(scale) * total


# ---------------------------------------------------------------------------
# Moments via the Stirling transform.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _stirling2_row(k: int) -> tuple[int, ...]:
    """Stirling set numbers S(k, 0..k) by the triangle recurrence."""
    row = [1]
    for m in range(1, k + 1):
        prev = row
        row = [0]
        for j in range(1, m + 1):
            above = prev[j] if j < len(prev) else 0
            row.append(j * above + prev[j - 1])
    return tuple(row)


def moment(k: int) -> int:
    """E[X^k] = sum_j S(k, j) (j!)^2, exactly."""
    if not 1 <= k <= 20:
        raise ValueError("moments supported for 1 <= k <= 20")
    row = _stirling2_row(k)
    return sum(row[j] * math.factorial(j) ** 2 for j in range(1, k + 1))


# ---------------------------------------------------------------------------
# Sampler.
# ---------------------------------------------------------------------------

def sample(seed: int, index: int = 0) -> int:
    """One mixed-Poisson draw: Z, Z' ~ Exp(1) by inverse CDF, then Poisson(Z*Z').

    Deterministic in (seed, index); mean <= 30 uses inversion by sequential
    search on a single uniform, larger means use transformed rejection.
    """
    z = -math.log1p(-_draw(seed, index, _SLOT_Z))
    zp = -math.log1p(-_draw(seed, index, _SLOT_ZPRIME))
    lam = z * zp
    if lam <= _POISSON_SEQUENTIAL_MAX:
        return _poisson_sequential(lam, _draw(seed, index, _SLOT_INVERSION))
    return _poisson_ptrs(lam, seed, index)


def _poisson_sequential(lam: float, u: float) -> int:
    """Smallest x with CDF(x) >= u; float accumulation matches the batch path."""
    p = math.exp(-lam)
    cum = p
    x = 0
    while u > cum and x < 500:
        x += 1
        p *= lam / x
        cum += p
    return x


def _poisson_ptrs(lam: float, seed: int, index: int) -> int:
    """Hormann's transformed rejection with squeeze; exact for lam >= 10."""
    slam = math.sqrt(lam)
    loglam = math.log(lam)
    b = 0.931 + 2.53 * slam
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    t = _SLOT_REJECTION
    while t < _MAX_REJECTION_SLOT:
        u = _draw(seed, index, t) - 0.5
        v = _draw(seed, index, t + 1)
        t += 2
        us = 0.5 - abs(u)
        k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
        if us >= 0.07 and v <= v_r:
            return int(k)
        if k < 0 or (us < 0.013 and v > us):
            continue
        if math.log(v) + math.log(inv_alpha) - math.log(a / (us * us) + b) <= k * loglam - lam - math.lgamma(k + 1.0):
            return int(k)
    raise RuntimeError("rejection sampler exhausted its draw slots")  # ~0.9 accept/iter; unreachable


def sample_batch(seed: int, count: int, start_index: int = 0) -> np.ndarray:
    """Vectorized draws identical to sample(seed, i) for each index."""
    out = np.empty(count, dtype=np.int64)
    state = seed_state(np.uint64(int(seed) & (2**64 - 1)))
    chunk = 1 << 22
    shift = np.uint64(13)
    for lo in range(0, count, chunk):
        hi = min(count, lo + chunk)
        idx = np.arange(start_index + lo, start_index + hi, dtype=np.uint64)
        packed = idx << shift
        z = -np.log1p(-unit_from_state(state, packed | np.uint64(_SLOT_Z), _DOM_SAMPLER))
        zp = -np.log1p(-unit_from_state(state, packed | np.uint64(_SLOT_ZPRIME), _DOM_SAMPLER))
        lam = z * zp
        res = np.zeros(hi - lo, dtype=np.int64)
        small = lam <= _POISSON_SEQUENTIAL_MAX
        u = unit_from_state(state, packed[small] | np.uint64(_SLOT_INVERSION), _DOM_SAMPLER)
        lam_s = lam[small]
        p = np.exp(-lam_s)
        cum = p.copy()
        x = np.zeros(lam_s.shape, dtype=np.int64)
        active = u > cum
        while active.any():
            x[active] += 1
            p[active] *= lam_s[active] / x[active]
            cum[active] += p[active]
            active &= (u > cum) & (x < 500)
        res[small] = x
        big = np.nonzero(~small)[0]
        for j in big:
            res[j] = _poisson_ptrs(float(lam[j]), seed, int(idx[j]))
        out[lo:hi] = res
    return out
