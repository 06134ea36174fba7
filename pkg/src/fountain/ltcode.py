"""LT encoding from (seed, ESI) pairs and the peeling decoder."""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist import DegreeDistribution, sample_degree, sample_degrees
from .galois import FieldMatrix
from .prng import SplitMix64, draw_uniform, symbol_state, symbol_states

# Above this degree the vectorised Floyd pass (quadratic in degree) loses to a set.
_VECTOR_DEGREE_LIMIT = 48


@dataclass(frozen=True)
class CodeParams:
    k: int
    symbol_size: int
    dist: DegreeDistribution
    base_seed: int = 0
    dist_id: int = 5

    def __post_init__(self) -> None:
        if self.k < 1 or self.symbol_size < 1:
            raise ValueError("k and symbol_size must be positive")
        if self.dist.k is not None and self.dist.k != self.k:
            raise ValueError(f"distribution built for k={self.dist.k}, code has k={self.k}")
        if self.dist.dmax > self.k:
            raise ValueError(f"distribution reaches degree {self.dist.dmax} > k = {self.k}")
        if not 0 <= self.base_seed < 1 << 64:
            raise ValueError("base_seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class EncodingSymbol:
    esi: int
    payload: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.esi < 1 << 32:
            raise ValueError("esi must fit in 32 unsigned bits")


@dataclass
class DecodeReport:
    status: str
    values: np.ndarray
    recovered: np.ndarray
    ripple_trace: list[int] = field(default_factory=list)
    release_trace: list[int] = field(default_factory=list)
    inactivation_count: int = 0
    rank: int | None = None

    @property
    def success(self) -> bool:
        return self.status == "success"

    @property
    def message(self) -> np.ndarray | None:
        return self.values if self.success else None

    @property
    def recovered_count(self) -> int:
        return int(self.recovered.sum())

    @property
    def unrecovered(self) -> list[int]:
        return np.flatnonzero(~self.recovered).tolist()


def _floyd(rng: SplitMix64, k: int, degree: int) -> list[int]:
    chosen: set[int] = set()
    for j in range(k - degree, k):
        t = rng.below(j + 1)
        chosen.add(j if t in chosen else t)
    return sorted(chosen)


def neighbors(p: CodeParams, esi: int) -> tuple[int, list[int]]:
    """Degree and ascending neighbour list of coded symbol ``esi``."""
    rng = SplitMix64(symbol_state(p.base_seed, esi))
    degree = sample_degree(p.dist, rng.uniform())
    return degree, _floyd(rng, p.k, degree)


def neighbors_batch(p: CodeParams, esis: Sequence[int] | np.ndarray) -> list[np.ndarray]:
    """Same output as :func:`neighbors` for many ESIs, vectorised per degree."""
    esis = np.asarray(esis, dtype=np.uint64)
    states = symbol_states(p.base_seed, esis)
    degrees = sample_degrees(p.dist, draw_uniform(states, 0))
    out: list[np.ndarray] = [None] * len(esis)  # type: ignore[list-item]
    for d in np.unique(degrees).tolist():
        sel = np.flatnonzero(degrees == d)
        if d > _VECTOR_DEGREE_LIMIT:
            for s in sel.tolist():
                rng = SplitMix64(int(states[s]))
                rng.next_u64()
                out[s] = np.array(_floyd(rng, p.k, d), dtype=np.int64)
            continue
        group = states[sel]
        chosen = np.empty((sel.size, d), dtype=np.int64)
        for step, j in enumerate(range(p.k - d, p.k)):
            t = (draw_uniform(group, step + 1) * (j + 1)).astype(np.int64)
            dup = (chosen[:, :step] == t[:, None]).any(axis=1)
            chosen[:, step] = np.where(dup, j, t)
        chosen.sort(axis=1)
        for i, s in enumerate(sel.tolist()):
            out[s] = chosen[i]
    return out


def _as_message(p: CodeParams, message: Sequence[bytes] | np.ndarray) -> np.ndarray:
    if isinstance(message, np.ndarray):
        arr = message.astype(np.uint8, copy=False)
    else:
        arr = np.array([np.frombuffer(bytes(m), dtype=np.uint8) for m in message]) if len(message) else None
    if arr is None or arr.shape != (p.k, p.symbol_size):
        raise ValueError(f"message must hold {p.k} payloads of {p.symbol_size} bytes")
    return arr


def xor_rows(values: np.ndarray, idx: Sequence[int] | np.ndarray) -> np.ndarray:
    if len(idx) == 0:
        return np.zeros(values.shape[1], dtype=np.uint8)
    return np.bitwise_xor.reduce(values[np.asarray(idx)], axis=0)


def encode_symbol(p: CodeParams, message: Sequence[bytes] | np.ndarray, esi: int) -> EncodingSymbol:
    msg = _as_message(p, message)
    _, nbrs = neighbors(p, esi)
    return EncodingSymbol(esi, xor_rows(msg, nbrs).tobytes())


def encode_symbols(p: CodeParams, message: Sequence[bytes] | np.ndarray, esis: Sequence[int]) -> list[EncodingSymbol]:
    msg = _as_message(p, message)
    return [EncodingSymbol(int(e), xor_rows(msg, nb).tobytes()) for e, nb in zip(esis, neighbors_batch(p, esis))]


def generator_matrix(p: CodeParams, esis: Sequence[int]) -> FieldMatrix:
    """k x n matrix whose column ``m`` marks the neighbours of ``esis[m]``."""
    bits = np.zeros((p.k, len(esis)), dtype=np.uint8)
    for m, nb in enumerate(neighbors_batch(p, esis)):
        bits[nb, m] = 1
    return FieldMatrix.from_array(bits, 2)


def peel(
    k: int,
    rows: Sequence[Sequence[int]],
    payloads: np.ndarray | None = None,
    keys: Sequence[int] | None = None,
    genie: np.random.Generator | None = None,
) -> DecodeReport:
    """Peeling decoder over check rows given as neighbour lists.

    Degree-one checks are consumed in ascending ``keys`` order (row position by
    default). With ``payloads`` of shape ``(len(rows), symbol_size)`` the values
    are recovered as well; without, only the structure is decoded. ``genie``
    reveals a random unrecovered variable whenever the ripple empties, which
    keeps the release statistics defined past a stall; reports produced with a
    genie count revealed variables as unrecovered.
    """
    n = len(rows)
    keys = list(range(n)) if keys is None else list(keys)
    deg = [0] * n
    xr = [0] * n
    var_checks: list[list[int]] = [[] for _ in range(k)]
    for c, row in enumerate(rows):
        deg[c] = len(row)
        acc = 0
        for v in row:
            var_checks[v].append(c)
            acc ^= v
        xr[c] = acc
    work = payloads.astype(np.uint8, copy=True) if payloads is not None else None
    values = np.zeros((k, 0 if work is None else work.shape[1]), dtype=np.uint8)
    recovered = np.zeros(k, dtype=bool)
    decoded = np.zeros(k, dtype=bool)
    ripple_hits = [0] * k
    ripple = 0
    heap: list[tuple[int, int]] = []
    for c in range(n):
        if deg[c] == 1:
            heap.append((keys[c], c))
            v = xr[c]
            ripple_hits[v] += 1
            if ripple_hits[v] == 1:
                ripple += 1
    heapq.heapify(heap)
    ripple_trace: list[int] = []
    release_trace: list[int] = []
    order = genie.permutation(k).tolist() if genie is not None else []
    cursor = 0
    remaining = k
    while remaining:
        src = -1
        while heap:
            _, c = heapq.heappop(heap)
            if deg[c] == 1:
                src = c
                break
        if src < 0:
            if genie is None:
                break
            while recovered[order[cursor]]:
                cursor += 1
            v = order[cursor]
        else:
            v = xr[src]
            if work is not None:
                values[v] = work[src]
            deg[src] = 0
            decoded[v] = True
        ripple_trace.append(ripple)
        recovered[v] = True
        remaining -= 1
        if ripple_hits[v]:
            ripple -= 1
            ripple_hits[v] = 0
        released = 0
        for c2 in var_checks[v]:
            if deg[c2] == 0:
                continue
            if work is not None and src >= 0:
                work[c2] ^= values[v]
            deg[c2] -= 1
            xr[c2] ^= v
            if deg[c2] == 1:
                released += 1
                heapq.heappush(heap, (keys[c2], c2))
                w = xr[c2]
                ripple_hits[w] += 1
                if ripple_hits[w] == 1:
                    ripple += 1
        release_trace.append(released)
    status = "success" if decoded.all() else "stalled"
    return DecodeReport(status, values, decoded, ripple_trace, release_trace)


def bp_decode(p: CodeParams, received: Sequence[EncodingSymbol]) -> DecodeReport:
    esis = [s.esi for s in received]
    if len(set(esis)) != len(esis):
        raise ValueError("duplicate ESI in received symbols")
    payloads = np.zeros((len(received), p.symbol_size), dtype=np.uint8)
    for i, s in enumerate(received):
        if len(s.payload) != p.symbol_size:
            raise ValueError(f"payload of ESI {s.esi} has {len(s.payload)} bytes, expected {p.symbol_size}")
        payloads[i] = np.frombuffer(s.payload, dtype=np.uint8)
    rows = neighbors_batch(p, esis) if esis else []
    return peel(p.k, [r.tolist() for r in rows], payloads, keys=esis)


# Packet layout: magic, version, flags, k, symbol_size, dist_id, reserved, base_seed, esi.
PACKET_HEADER = struct.Struct("<4sBBIIBBQI")
PACKET_MAGIC = b"LTPK"
PACKET_VERSION = 1
FLAG_SYSTEMATIC = 0x01
FLAG_LENGTH_TRAILER = 0x02

DIST_IDS = {0: "soliton", 1: "robust", 2: "raptor_ref", 3: "table1_4096", 4: "table1_8192", 5: "file"}


@dataclass(frozen=True)
class PacketHeader:
    flags: int
    k: int
    symbol_size: int
    dist_id: int
    base_seed: int
    esi: int

    @property
    def systematic(self) -> bool:
        return bool(self.flags & FLAG_SYSTEMATIC)


def pack_packet(p: CodeParams, symbol: EncodingSymbol, flags: int = 0, k: int | None = None) -> bytes:
    """Header plus payload; ``k`` overrides ``p.k`` when a precode sits in front of the LT code."""
    if len(symbol.payload) != p.symbol_size:
        raise ValueError("payload length differs from symbol_size")
    head = PACKET_HEADER.pack(
        PACKET_MAGIC, PACKET_VERSION, flags, p.k if k is None else k, p.symbol_size, p.dist_id, 0, p.base_seed, symbol.esi
    )
    return head + symbol.payload


def unpack_packet(data: bytes) -> tuple[PacketHeader, bytes]:
    if len(data) < PACKET_HEADER.size:
        raise ValueError("packet shorter than its header")
    magic, version, flags, k, size, dist_id, _, seed, esi = PACKET_HEADER.unpack_from(data)
    if magic != PACKET_MAGIC:
        raise ValueError("bad packet magic")
    if version != PACKET_VERSION:
        raise ValueError(f"unsupported packet version {version}")
    payload = data[PACKET_HEADER.size:]
    if len(payload) != size:
        raise ValueError(f"packet payload has {len(payload)} bytes, header says {size}")
    return PacketHeader(flags, k, size, dist_id, seed, esi), payload
