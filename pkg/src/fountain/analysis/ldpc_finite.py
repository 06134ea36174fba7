"""Exact finite-length BP erasure probabilities of regular LDPC ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

EXACT_LENGTH_LIMIT = 64
READINGS = ("edges", "printed")


@dataclass(frozen=True)
class ConditionalErasure:
    """Per erasure count ``i``: block failure probability and expected residual fraction."""

    block: list[Fraction]
    bit: list[Fraction]


def _make_counter(l: int, r: int, dead_sockets: bool):
    """Memoised T, N and O for one (l, r) pair; the tables die with the call."""
    base = [math.comb(r, a) if a >= 2 else 0 for a in range(r + 1)]

    @lru_cache(maxsize=None)
    def power(j: int) -> tuple[int, ...]:
        if j == 0:
            return (1,)
        prev = power(j - 1)
        out = [0] * (len(prev) + r)
        for a, pa in enumerate(prev):
            if pa:
                for b, pb in enumerate(base):
                    if pb:
                        out[a + b] += pa * pb
        return tuple(out)

    @lru_cache(maxsize=None)
    def coef(j: int, d: int, t: int) -> int:
        poly = power(j)
        if not dead_sockets:
            return poly[t] if t < len(poly) else 0
        return sum(poly[a] * math.comb(d, t - a) for a in range(min(t, len(poly) - 1) + 1))

    def total(v: int, c: int, d: int) -> int:
        slots = c * r + d
        if v * l > slots:
            return 0
        return math.comb(slots, v * l) * math.factorial(v * l)

    @lru_cache(maxsize=None)
    def clean(v: int, c: int, d: int) -> int:
        out = total(v, c, d)
        for s in range(1, v + 1):
            out -= math.comb(v, s) * stuck(v, s, c, d)
        return out

    @lru_cache(maxsize=None)
    def stuck(v: int, s: int, c: int, d: int) -> int:
        t = s * l
        out = 0
        for j in range(c + 1):
            room = d + j * r - t
            if room < 0:
                continue
            ways = coef(j, d, t)
            if ways:
                out += math.comb(c, j) * ways * math.factorial(t) * clean(v - s, c - j, room)
        return out

    return total, clean, stuck


def ldpc_conditional(n: int, l: int, r: int, reading: str = "edges") -> ConditionalErasure:
    """Exact per-erasure-count failure terms.

    ``reading="edges"`` counts m = n*l/r checks and lets a stopping set use
    the spare sockets of checks already saturated by an outer one.
    ``reading="printed"`` uses n/r checks and no spare-socket factor, and
    declares failure outright once i reaches n/r.
    """
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}")
    if n < 1 or l < 1 or r < 2 or (n * l) % r:
        raise ValueError("n*l must be a positive multiple of r")
    if n > EXACT_LENGTH_LIMIT:
        raise ValueError(f"exact evaluation is limited to n <= {EXACT_LENGTH_LIMIT}; use Monte Carlo for longer codes")
    if reading == "printed":
        if n % r:
            raise ValueError("the printed check count n/r needs r | n")
        checks = n // r
    else:
        checks = n * l // r
    total, clean, stuck = _make_counter(l, r, reading == "edges")
    block: list[Fraction] = []
    bit: list[Fraction] = []
    for i in range(n + 1):
        t = total(i, checks, 0)
        if t == 0:
            block.append(Fraction(1))
            bit.append(Fraction(i, n))
            continue
        if reading == "printed" and i > checks - 1:
            block.append(Fraction(1))
        else:
            block.append(1 - Fraction(clean(i, checks, 0), t))
        num = sum(math.comb(i, s) * s * stuck(i, s, checks, 0) for s in range(1, i + 1))
        bit.append(Fraction(num, n * t))
    return ConditionalErasure(block, bit)


def ldpc_finite_length(n: int, l: int, r: int, gamma, reading: str = "edges"):
    """Block and bit erasure probabilities after BP on an (l, r)-regular code of length n.

    With ``gamma`` given as an int or Fraction the result is exact; floats
    give floats.
    """
    cond = ldpc_conditional(n, l, r, reading)
    exact = isinstance(gamma, (int, Fraction))
    g = Fraction(gamma) if exact else float(gamma)
    if not 0 <= g <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    p_block = Fraction(0) if exact else 0.0
    p_bit = Fraction(0) if exact else 0.0
    for i in range(n + 1):
        w = math.comb(n, i) * g**i * (1 - g) ** (n - i)
        if exact:
            p_block += w * cond.block[i]
            p_bit += w * cond.bit[i]
        else:
            p_block += w * float(cond.block[i])
            p_bit += w * float(cond.bit[i])
    return p_block, p_bit
