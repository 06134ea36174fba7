"""Failure of LT-plus-precode cascades and repair cost in storage."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from ..dist import DegreeDistribution, avg_degree

SUM_TOL = 1e-12


def _at(vec: Sequence[float], i: int) -> float:
    return float(vec[i]) if 0 <= i < len(vec) else 0.0


def concat_failure(p: Sequence[float], q_stages: Sequence[Sequence[float]], n_sizes: Sequence[int]) -> float:
    """Failure probability of an LT code followed by P precoding stages.

    ``n_sizes = [n_1, ..., n_P]`` lists stage lengths from the message side
    out; ``p[l]`` is the chance the LT decoder recovers ``l`` of the ``n_P``
    symbols; ``q_stages[i - 1][s]`` is the chance stage ``i`` corrects ``s``
    erasures. Fractional erasure counts are floored. Indices past a vector's
    end read as zero.
    """
    P = len(n_sizes)
    if P < 1 or len(q_stages) != P:
        raise ValueError("need one q vector per stage")
    if any(n < 1 for n in n_sizes):
        raise ValueError("stage lengths must be positive")
    n = list(n_sizes)
    if len(p) > n[-1] + 1:
        raise ValueError(f"p has entries past l = n_P = {n[-1]}")
    if any(x < 0 for x in p) or sum(p) > 1 + SUM_TOL:
        raise ValueError("p must be non-negative and sum to at most 1")
    q1 = q_stages[0]
    if P == 1:
        return sum(_at(p, l) * (1.0 - _at(q1, n[0] - l)) for l in range(n[0] + 1))

    total = 0.0
    for l in range(n[-1] + 1):
        pl = _at(p, l)
        if pl == 0:
            continue
        for s_top in range(n[-1] - l + 1):
            w = pl * _at(q_stages[-1], s_top)
            if w == 0:
                continue
            used = Fraction(l + s_top, n[-1])
            total += _descend(P - 1, used, w, q_stages, n)
    return total


def _descend(j: int, used: Fraction, weight: float, q_stages, n) -> float:
    """Sum over s_j, ..., s_2 given the recovered fraction ``used`` from outer stages."""
    limit = math.floor(n[j - 1] * (1 - used))
    if j == 1:
        return weight * (1.0 - _at(q_stages[0], limit))
    out = 0.0
    for s in range(max(limit, -1) + 1):
        w = weight * _at(q_stages[j - 1], s)
        if w:
            out += _descend(j - 1, used + Fraction(s, n[j - 1]), w, q_stages, n)
    return out


def repair_complexity(mu_e: float, mu_d: float, k: int, l_size: int) -> float:
    """Average symbol operations per repaired symbol when ``l_size`` symbols are rebuilt together."""
    if l_size < 1:
        raise ValueError("need at least one repaired symbol")
    return mu_d * k / l_size + mu_e


def copy_repair_bound(d: DegreeDistribution, epsilon: float) -> float:
    """Per-symbol cost ceiling when repairs re-encode from a systematic copy."""
    return (1.0 + epsilon) * avg_degree(d)
