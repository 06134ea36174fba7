"""Brute-force reference computations used only by the tests."""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np


def rank_by_span(rows: list[int]) -> int:
    """GF(2) rank as log2 of the size of the enumerated row space."""
    span = {0}
    for r in rows:
        span |= {s ^ r for s in span}
    return len(span).bit_length() - 1


def full_rank_count(mx: int, my: int) -> int:
    """Number of binary mx x my matrices (mx rows of my bits) of rank mx."""
    return sum(
        rank_by_span(list(rows)) == mx for rows in itertools.product(range(1 << my), repeat=mx)
    )


def _peel_counts(counts: list[tuple[int, ...]], m: int) -> int:
    """Residual erased-variable count after socket-count peeling."""
    alive = list(range(len(counts)))
    while True:
        load = [0] * m
        for v in alive:
            for c, a in enumerate(counts[v]):
                load[c] += a
        freed = None
        for c in range(m):
            if load[c] == 1:
                freed = next(v for v in alive if counts[v][c])
                break
        if freed is None:
            return len(alive)
        alive.remove(freed)


def ldpc_ensemble_conditional(n: int, l: int, r: int, upto: int | None = None) -> tuple[list[Fraction], list[Fraction]]:
    """Exact BP failure and mean residual fraction per erasure count, by ensemble enumeration.

    The ensemble is a uniform socket permutation; the erased variables'
    sockets land on check sockets injectively. Each variable's placement is a
    multiset of checks; the variables are exchangeable, so multisets of those
    rows are enumerated with their ordering and socket-assignment weights.
    """
    m = n * l // r
    sockets = n * l
    rows = []
    for combo in itertools.combinations_with_replacement(range(m), l):
        cnt = [0] * m
        for c in combo:
            cnt[c] += 1
        rows.append(tuple(cnt))
    block, bit = [], []
    for i in range(n + 1 if upto is None else upto + 1):
        total = math.perm(sockets, i * l)
        fail = Fraction(0)
        residual = Fraction(0)
        seen = 0
        for group in itertools.combinations_with_replacement(range(len(rows)), i):
            counts = [rows[g] for g in group]
            load = [sum(col) for col in zip(*counts)] if counts else [0] * m
            if any(x > r for x in load):
                continue
            w = math.factorial(i)
            for mult in Counter(group).values():
                w //= math.factorial(mult)
            for row in counts:
                w *= math.factorial(l) // math.prod(math.factorial(a) for a in row)
            for x in load:
                w *= math.perm(r, x)
            seen += w
            left = _peel_counts(counts, m)
            if left:
                fail += w
                residual += w * left
        assert seen == total, (i, seen, total)
        block.append(fail / total)
        bit.append(residual / (n * total))
    return block, bit


def ldpc_permutation_conditional(n: int, l: int, r: int) -> tuple[list[Fraction], list[Fraction]]:
    """Same quantities by running peeling on every socket permutation and every erasure set."""
    m = n * l // r
    sockets = n * l
    fail = [0] * (n + 1)
    residual = [0] * (n + 1)
    patterns = [0] * (n + 1)
    for perm in itertools.permutations(range(sockets)):
        counts_all = [[0] * m for _ in range(n)]
        for s, t in enumerate(perm):
            counts_all[s // l][t // r] += 1
        for mask in range(1 << n):
            erased = [v for v in range(n) if mask >> v & 1]
            left = _peel_counts([tuple(counts_all[v]) for v in erased], m)
            i = len(erased)
            patterns[i] += 1
            fail[i] += left > 0
            residual[i] += left
    block = [Fraction(fail[i], patterns[i]) for i in range(n + 1)]
    bit = [Fraction(residual[i], n * patterns[i]) for i in range(n + 1)]
    return block, bit


def ldpc_monte_carlo_conditional(n: int, l: int, r: int, i: int, trials: int, rng: np.random.Generator) -> float:
    """Empirical BP failure rate with exactly ``i`` erased variables."""
    m = n * l // r
    fails = 0
    for _ in range(trials):
        perm = rng.permutation(n * l)
        counts = np.zeros((n, m), dtype=np.int64)
        np.add.at(counts, (np.arange(n * l) // l, perm // r), 1)
        erased = rng.choice(n, size=i, replace=False)
        fails += _peel_counts([tuple(counts[v].tolist()) for v in erased], m) > 0
    return fails / trials


def giant_fixed_point(m: float) -> float:
    """Positive root of 1 - phi = exp(-m phi) by bisection."""
    lo, hi = 1e-12, 1.0
    f = lambda x: 1.0 - x - math.exp(-m * x)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def hamming_correctable_by_rank(r: int, tau: int) -> int:
    """Weight-tau erasure sets whose parity-check columns are independent."""
    cols = list(range(1, 2**r))
    return sum(rank_by_span(list(s)) == tau for s in itertools.combinations(cols, tau))
