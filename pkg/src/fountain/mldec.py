"""Maximum-likelihood erasure decoding and the inactivation decoder."""

from __future__ import annotations

import heapq
from typing import Sequence

import numpy as np

from .galois import FieldMatrix, mat_solve, row_reduce
from .ltcode import DecodeReport


def _check_inputs(g: FieldMatrix, payloads: np.ndarray) -> np.ndarray:
    if g.q != 2:
        raise ValueError("decoders work over GF(2)")
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.ndim == 1:
        payloads = payloads[:, None]
    if payloads.shape[0] != g.cols:
        raise ValueError(f"{payloads.shape[0]} payloads for {g.cols} received columns")
    return payloads


def ml_decode(g: FieldMatrix, payloads: np.ndarray) -> DecodeReport:
    """Gaussian elimination on ``g^T x = payloads``; ``g`` is k x n.

    On a rank deficit the report still carries every variable the system pins
    down (those whose unit vector lies in the row space).
    """
    payloads = _check_inputs(g, payloads)
    k = g.rows
    system = g.transpose()
    if system.rows >= k:
        res = mat_solve(system, payloads)
        if res.ok:
            return DecodeReport("success", res.solution, np.ones(k, dtype=bool), rank=k)
    red = row_reduce(system, payloads, jordan=True)
    values = np.zeros((k, payloads.shape[1]), dtype=np.uint8)
    recovered = np.zeros(k, dtype=bool)
    weights = np.bitwise_count(red.data[: red.rank]).sum(axis=1)
    for r, c in enumerate(red.pivots):
        if weights[r] == 1:
            values[c] = red.rhs[r]
            recovered[c] = True
    return DecodeReport("stalled", values, recovered, rank=red.rank)


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def inactivation_decode(g: FieldMatrix, payloads: np.ndarray) -> DecodeReport:
    """Inactivation decoding of ``g^T x = payloads`` with ``g`` given k x n."""
    payloads = _check_inputs(g, payloads)
    dense = g.entries
    rows = [np.flatnonzero(dense[:, m]).tolist() for m in range(g.cols)]
    return inactivation_solve(g.rows, rows, payloads)


def inactivation_solve(
    k: int,
    rows: Sequence[Sequence[int]],
    payloads: np.ndarray,
    keys: Sequence[int] | None = None,
) -> DecodeReport:
    """Peel, inactivating a variable whenever the ripple runs dry, then solve the inactive core.

    Each peeled variable is carried as ``payload + coef . x_inactive`` with
    ``coef`` an integer bitmask over inactivation order, so once the dense
    core is solved every peeled value follows by one substitution.
    """
    n = len(rows)
    keys = list(range(n)) if keys is None else list(keys)
    payloads = np.asarray(payloads, dtype=np.uint8)
    if payloads.ndim == 1:
        payloads = payloads[:, None]
    pay = payloads.copy()
    coef = [0] * n
    adeg = [len(r) for r in rows]
    axr = [0] * n
    used = [False] * n
    var_checks: list[list[int]] = [[] for _ in range(k)]
    for c, row in enumerate(rows):
        acc = 0
        for v in row:
            var_checks[v].append(c)
            acc ^= v
        axr[c] = acc
    ACTIVE, PEELED, INACTIVE = 0, 1, 2
    state = [ACTIVE] * k
    peeled_pay = np.zeros((k, pay.shape[1]), dtype=np.uint8)
    peeled_coef = [0] * k
    inactive: list[int] = []
    heap: list[tuple[int, int]] = []
    ripple_hits = [0] * k
    ripple = 0
    ripple_trace: list[int] = []
    remaining = k

    def enter_ripple(c: int) -> None:
        nonlocal ripple
        heapq.heappush(heap, (keys[c], c))
        ripple_hits[axr[c]] += 1
        if ripple_hits[axr[c]] == 1:
            ripple += 1

    for c in range(n):
        if adeg[c] == 1:
            enter_ripple(c)

    def drop_variable(v: int, value: np.ndarray | None, mask: int) -> None:
        nonlocal ripple
        if ripple_hits[v]:
            ripple -= 1
            ripple_hits[v] = 0
        for c2 in var_checks[v]:
            if used[c2]:
                continue
            if value is not None:
                pay[c2] ^= value
            coef[c2] ^= mask
            adeg[c2] -= 1
            axr[c2] ^= v
            if adeg[c2] == 1:
                enter_ripple(c2)

    def active_in(c: int) -> list[int]:
        return [v for v in rows[c] if state[v] == ACTIVE]

    while remaining:
        src = -1
        while heap:
            _, c = heapq.heappop(heap)
            if not used[c] and adeg[c] == 1:
                src = c
                break
        if src >= 0:
            ripple_trace.append(ripple)
            v = axr[src]
            used[src] = True
            state[v] = PEELED
            peeled_pay[v] = pay[src]
            peeled_coef[v] = coef[src]
            remaining -= 1
            drop_variable(v, peeled_pay[v], peeled_coef[v])
            continue
        candidates = [c for c in range(n) if not used[c] and adeg[c] >= 2]
        if candidates:
            pairs = [c for c in candidates if adeg[c] == 2]
            pool = pairs if pairs else candidates
            low = min(adeg[c] for c in pool)
            chosen = min((c for c in pool if adeg[c] == low), key=lambda c: keys[c])
            w = max(active_in(chosen), key=lambda v: (len(var_checks[v]), -v))
        else:
            w = next(v for v in range(k) if state[v] == ACTIVE)
        state[w] = INACTIVE
        mask = 1 << len(inactive)
        inactive.append(w)
        remaining -= 1
        drop_variable(w, None, mask)

    values = np.zeros((k, pay.shape[1]), dtype=np.uint8)
    recovered = np.zeros(k, dtype=bool)
    leftover = sorted((c for c in range(n) if not used[c]), key=lambda c: keys[c])
    width = len(inactive)
    core_values = np.zeros((width, pay.shape[1]), dtype=np.uint8)
    ok = True
    if width:
        core = FieldMatrix.from_row_sets([_bits(coef[c]) for c in leftover], width)
        core_rhs = pay[leftover] if leftover else np.zeros((0, pay.shape[1]), dtype=np.uint8)
        res = mat_solve(core, core_rhs) if core.rows >= width else None
        if res is not None and res.ok:
            core_values[:] = res.solution
        else:
            ok = False
            red = row_reduce(core, core_rhs, jordan=True)
            basis = []
            for r, c in enumerate(red.pivots):
                row_int = int.from_bytes(red.data[r].astype("<u8").tobytes(), "little")
                basis.append((c, row_int, red.rhs[r]))
    rank = k
    if ok:
        for v in range(k):
            if state[v] == PEELED:
                idx = _bits(peeled_coef[v])
                values[v] = peeled_pay[v] ^ np.bitwise_xor.reduce(core_values[idx], axis=0) if idx else peeled_pay[v]
        values[inactive] = core_values
        recovered[:] = True
    else:
        rank = k - width + len(basis)

        def reduce(mask: int, base: np.ndarray) -> np.ndarray | None:
            acc = base.copy()
            for c, row_int, rhs in basis:
                if mask >> c & 1:
                    mask ^= row_int
                    acc ^= rhs
            return acc if mask == 0 else None

        zero = np.zeros(pay.shape[1], dtype=np.uint8)
        for v in range(k):
            got = reduce(peeled_coef[v], peeled_pay[v]) if state[v] == PEELED else reduce(1 << inactive.index(v), zero)
            if got is not None:
                values[v] = got
                recovered[v] = True
    status = "success" if ok else "stalled"
    return DecodeReport(status, values, recovered, ripple_trace, inactivation_count=width, rank=rank)
