"""Arithmetic over GF(2) and GF(2^8) plus dense elimination for both fields.

GF(2) matrices are kept bit-packed: column ``j`` lives in word ``j // 64`` at
bit ``j % 64`` of a little-endian ``uint64`` row. GF(256) matrices are plain
``uint8`` arrays multiplied through a full 256x256 product table.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

PRIMITIVE_POLY = 0x11D
SUPPORTED_ORDERS = (2, 256)


def _build_tables() -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    exp = np.zeros(510, dtype=np.uint8)
    log = np.zeros(256, dtype=np.int32)
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= PRIMITIVE_POLY
    exp[255:510] = exp[0:255]
    nz = np.arange(1, 256)
    mul = np.zeros((256, 256), dtype=np.uint8)
    mul[1:, 1:] = exp[log[nz][:, None] + log[nz][None, :]]
    inv = np.zeros(256, dtype=np.uint8)
    inv[1:] = exp[(255 - log[nz]) % 255]
    return exp, log, mul, inv


EXP_TABLE, LOG_TABLE, MUL_TABLE, INV_TABLE = _build_tables()


def _check_order(q: int) -> None:
    if q not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported field order {q}; expected 2 or 256")


@dataclass(frozen=True)
class FieldElement:
    value: int
    q: int = 256

    def __post_init__(self) -> None:
        _check_order(self.q)
        if not 0 <= self.value < self.q:
            raise ValueError(f"value {self.value} outside GF({self.q})")

    def _same_field(self, other: FieldElement) -> None:
        if self.q != other.q:
            raise ValueError(f"mixed field orders {self.q} and {other.q}")

    def __add__(self, other: FieldElement) -> FieldElement:
        self._same_field(other)
        return FieldElement(self.value ^ other.value, self.q)

    __sub__ = __add__

    def __mul__(self, other: FieldElement) -> FieldElement:
        self._same_field(other)
        if self.q == 2:
            return FieldElement(self.value & other.value, 2)
        return FieldElement(int(MUL_TABLE[self.value, other.value]), 256)

    def inv(self) -> FieldElement:
        if self.value == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        if self.q == 2:
            return self
        return FieldElement(int(INV_TABLE[self.value]), 256)


def gf_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def gf_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def gf_inv(a: FieldElement) -> FieldElement:
    return a.inv()


def gf256_mul_slow(a: int, b: int) -> int:
    """Carry-less multiply reduced by the primitive polynomial, bit by bit."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= PRIMITIVE_POLY
    return out


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    rows, cols = bits.shape
    words = max(1, -(-cols // 64))
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64)


def _unpack_bits(words: np.ndarray, cols: int) -> np.ndarray:
    as_bytes = np.ascontiguousarray(words.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


@dataclass(frozen=True, eq=False)
class FieldMatrix:
    """Dense matrix over GF(2) (bit-packed words) or GF(256) (bytes)."""

    rows: int
    cols: int
    q: int
    data: np.ndarray

    def __post_init__(self) -> None:
        _check_order(self.q)
        self.data.setflags(write=False)

    @classmethod
    def from_array(cls, entries: Iterable | np.ndarray, q: int = 2) -> FieldMatrix:
        _check_order(q)
        arr = np.asarray(entries, dtype=np.int64)
        if arr.ndim != 2:
            arr = arr.reshape(arr.shape[0] if arr.ndim else 0, -1)
        if arr.size and (arr.min() < 0 or arr.max() >= q):
            raise ValueError(f"entries must lie in [0, {q - 1}]")
        rows, cols = arr.shape
        if q == 2:
            data = _pack_bits(arr.astype(np.uint8))
        else:
            data = arr.astype(np.uint8).copy()
        return cls(rows, cols, q, data)

    @classmethod
    def from_row_sets(cls, row_sets: Iterable[Iterable[int]], cols: int) -> FieldMatrix:
        """GF(2) matrix whose row ``i`` has ones at the indices in ``row_sets[i]``."""
        row_sets = list(row_sets)
        bits = np.zeros((len(row_sets), cols), dtype=np.uint8)
        for i, idx in enumerate(row_sets):
            for j in idx:
                bits[i, j] ^= 1
        return cls(len(row_sets), cols, 2, _pack_bits(bits))

    @classmethod
    def identity(cls, n: int, q: int = 2) -> FieldMatrix:
        return cls.from_array(np.eye(n, dtype=np.int64), q)

    @classmethod
    def zeros(cls, rows: int, cols: int, q: int = 2) -> FieldMatrix:
        return cls.from_array(np.zeros((rows, cols), dtype=np.int64), q)

    @property
    def entries(self) -> np.ndarray:
        """Row-major dense ``uint8`` view of the entries."""
        if self.q == 2:
            return _unpack_bits(self.data, self.cols)
        return self.data.copy()

    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        if self.q == 2:
            return int((int(self.data[i, j // 64]) >> (j % 64)) & 1)
        return int(self.data[i, j])

    def transpose(self) -> FieldMatrix:
        return FieldMatrix.from_array(self.entries.T, self.q)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``self @ x`` where ``x`` holds ``cols`` symbol rows of bytes."""
        x = np.asarray(x, dtype=np.uint8)
        vec = x.ndim == 1
        x2 = x[:, None] if vec else x
        dense = self.entries
        out = np.zeros((self.rows, x2.shape[1]), dtype=np.uint8)
        for i in range(self.rows):
            if self.q == 2:
                sel = x2[dense[i] == 1]
                if len(sel):
                    out[i] = np.bitwise_xor.reduce(sel, axis=0)
            else:
                prods = MUL_TABLE[dense[i][:, None], x2]
                out[i] = np.bitwise_xor.reduce(prods, axis=0)
        return out[:, 0] if vec else out


@dataclass
class Reduction:
    """Outcome of Gauss-Jordan elimination.

    ``pivots[i]`` is the pivot column of reduced row ``i``; rows past
    ``len(pivots)`` are zero. ``data`` and ``rhs`` are the reduced copies.
    """

    pivots: list[int]
    data: np.ndarray
    rhs: np.ndarray | None

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _eliminate_gf2(words: np.ndarray, cols: int, rhs: np.ndarray | None, jordan: bool) -> list[int]:
    nrows = words.shape[0]
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == nrows:
            break
        w = c // 64
        bit = np.uint64(1 << (c % 64))
        below = np.flatnonzero(words[r:, w] & bit)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            words[[r, p]] = words[[p, r]]
            if rhs is not None:
                rhs[[r, p]] = rhs[[p, r]]
        if jordan:
            hit = np.flatnonzero(words[:, w] & bit)
            hit = hit[hit != r]
        else:
            hit = r + 1 + np.flatnonzero(words[r + 1:, w] & bit)
        if hit.size:
            words[hit] ^= words[r]
            if rhs is not None:
                rhs[hit] ^= rhs[r]
        pivots.append(c)
        r += 1
    return pivots


def _eliminate_gf256(a: np.ndarray, rhs: np.ndarray | None, jordan: bool) -> list[int]:
    nrows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == nrows:
            break
        below = np.flatnonzero(a[r:, c])
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
            if rhs is not None:
                rhs[[r, p]] = rhs[[p, r]]
        scale = INV_TABLE[a[r, c]]
        a[r] = MUL_TABLE[scale, a[r]]
        if rhs is not None:
            rhs[r] = MUL_TABLE[scale, rhs[r]]
        if jordan:
            hit = np.flatnonzero(a[:, c])
            hit = hit[hit != r]
        else:
            hit = r + 1 + np.flatnonzero(a[r + 1:, c])
        if hit.size:
            factors = a[hit, c][:, None]
            a[hit] ^= MUL_TABLE[factors, a[r][None, :]]
            if rhs is not None:
                rhs[hit] ^= MUL_TABLE[factors, rhs[r][None, :]]
        pivots.append(c)
        r += 1
    return pivots


def row_reduce(m: FieldMatrix, rhs: np.ndarray | None = None, jordan: bool = True) -> Reduction:
    """Eliminate ``m`` (and ``rhs`` alongside it), pivoting on the first nonzero row."""
    data = m.data.copy()
    work = None
    if rhs is not None:
        work = np.array(rhs, dtype=np.uint8, copy=True)
        if work.ndim == 1:
            work = work[:, None]
        if work.shape[0] != m.rows:
            raise ValueError("rhs must have one row per matrix row")
    if m.q == 2:
        pivots = _eliminate_gf2(data, m.cols, work, jordan)
    else:
        pivots = _eliminate_gf256(data, work, jordan)
    return Reduction(pivots, data, work)


def mat_rank(m: FieldMatrix) -> int:
    return row_reduce(m, jordan=False).rank


@dataclass
class SolveResult:
    ok: bool
    rank: int
    solution: np.ndarray | None = None


def mat_solve(m: FieldMatrix, rhs: np.ndarray) -> SolveResult:
    """Solve ``m @ x = rhs`` where every column of ``rhs`` is a parallel right-hand side.

    Returns ``ok=False`` with the achieved rank when ``m`` lacks full column rank.
    """
    if m.rows < m.cols:
        raise ValueError("mat_solve needs at least as many rows as columns")
    vec = np.asarray(rhs).ndim == 1
    red = row_reduce(m, rhs, jordan=True)
    if red.rank < m.cols:
        return SolveResult(False, red.rank)
    sol = red.rhs[: m.cols].copy()
    return SolveResult(True, red.rank, sol[:, 0] if vec else sol)


def gf2_rank_rows(rows: Iterable[int]) -> int:
    """Rank of a GF(2) matrix given as integer row bitsets."""
    basis: dict[int, int] = {}
    for row in rows:
        while row:
            top = row.bit_length() - 1
            if top not in basis:
                basis[top] = row
                break
            row ^= basis[top]
    return len(basis)


def gf2_rank_batch(mats: np.ndarray, cols: int) -> np.ndarray:
    """Ranks of many small GF(2) matrices at once.

    ``mats`` has shape ``(trials, rows)``; each entry is a row bitset with at
    most 64 columns.
    """
    if cols > 64:
        raise ValueError("batched rank supports at most 64 columns")
    work = np.array(mats, dtype=np.uint64, copy=True)
    trials, nrows = work.shape
    used = np.zeros((trials, nrows), dtype=bool)
    rank = np.zeros(trials, dtype=np.int64)
    rows_idx = np.arange(trials)
    for c in range(cols):
        bit = np.uint64(1 << c)
        has = ((work & bit) != 0) & ~used
        found = has.any(axis=1)
        if not found.any():
            continue
        piv = np.argmax(has, axis=1)
        prow = work[rows_idx, piv]
        hit = (work & bit) != 0
        hit[rows_idx, piv] = False
        hit &= found[:, None]
        work ^= np.where(hit, prow[:, None], np.uint64(0))
        used[rows_idx[found], piv[found]] = True
        rank += found
    return rank
