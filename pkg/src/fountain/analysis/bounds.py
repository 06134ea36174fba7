"""Rank probabilities and failure bounds for dense and sparse random fountain codes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from ..dist import DegreeDistribution, avg_degree

# Below this many rows the failure probability is formed from the rational product.
EXACT_RANK_LIMIT = 256


@dataclass(frozen=True)
class BoundResult:
    lower: float
    upper: float
    exact: float | None = None

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")

    def contains_exact(self) -> bool:
        return self.exact is not None and self.lower <= self.exact <= self.upper


def full_rank_prob(mx: int, my: int, q: int, exact: bool = False) -> float | Fraction:
    """Probability that a uniform mx x my matrix over GF(q) has rank mx."""
    if mx < 1 or q < 2:
        raise ValueError("need mx >= 1 and q >= 2")
    if my < mx:
        return Fraction(0) if exact else 0.0
    if exact:
        out = Fraction(1)
        for i in range(mx):
            out *= 1 - Fraction(q) ** (i - my)
        return out
    return math.exp(_log_full_rank(mx, my, q))


def _log_full_rank(mx: int, my: int, q: int) -> float:
    i = np.arange(mx, dtype=np.float64)
    return float(np.log1p(-np.power(float(q), i - my)).sum())


def ml_failure_bounds(mx: int, my: int, q: int) -> BoundResult:
    """Bracket on the probability that a dense random mx x my system is rank deficient."""
    if my < mx:
        raise ValueError("need my >= mx")
    diff = mx - my
    if mx <= EXACT_RANK_LIMIT:
        exact = float(1 - full_rank_prob(mx, my, q, exact=True))
    else:
        exact = -math.expm1(_log_full_rank(mx, my, q))
    return BoundResult(float(q) ** (diff - 1), float(q) ** diff / (q - 1), exact)


def _log_binom(n: np.ndarray | float, k: np.ndarray | float) -> np.ndarray:
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    out = np.full(np.broadcast(n, k).shape, -np.inf)
    ok = (k >= 0) & (k <= n)
    n, k = np.broadcast_to(n, out.shape), np.broadcast_to(k, out.shape)
    out[ok] = gammaln(n[ok] + 1) - gammaln(k[ok] + 1) - gammaln(n[ok] - k[ok] + 1)
    return out


def symbol_ml_upper(k: int, n: int, d: DegreeDistribution) -> float:
    """Union bound on the probability that one fixed message bit is not ML-decodable."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    degrees = np.flatnonzero(d.probs) + 1
    if degrees.max() > k:
        raise ValueError("distribution degree exceeds k")
    weights = d.probs[degrees - 1]
    total = 0.0
    for l in range(1, k + 1):
        inner = 0.0
        for deg, w in zip(degrees.tolist(), weights.tolist()):
            top = min(l, deg - deg % 2)
            s = np.arange(0, top + 1, 2)
            logs = _log_binom(l, s) + _log_binom(k - l, deg - s) - _log_binom(k, deg)
            inner += w * float(np.exp(logs).sum())
        if inner <= 0.0:
            continue
        total += math.exp(float(_log_binom(k - 1, l - 1)) + n * math.log(min(inner, 1.0)))
    return min(max(total, 0.0), 1.0)


def coverage_bounds(k: int, n: int, d: DegreeDistribution) -> BoundResult:
    """Probability a given message symbol is touched by none of ``n`` coded symbols."""
    mean = avg_degree(d)
    if mean >= k:
        raise ValueError(f"average degree {mean} must stay below k = {k}")
    exact = (1.0 - mean / k) ** n
    return BoundResult(math.exp(-mean * n / (k - mean)), math.exp(-mean * n / k), exact)


def balls_in_bins_overhead(k: int, gamma: float) -> float:
    """Degree-one symbol count making the expected number of uncovered inputs equal gamma."""
    if not 0 < gamma < k:
        raise ValueError("need 0 < gamma < k")
    return k * math.log(k / gamma)


def coverage_union_bound(k: int, n: float) -> float:
    """Union bound k * exp(-n / k) on some input being uncovered by n degree-one symbols."""
    return k * math.exp(-n / k)
