"""Hamming and regular LDPC precodes, the BP-decodable graph G*, and the concatenated codec."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import binom

from .dist import DegreeDistribution, omega_star, sample_degree, sample_degrees
from .galois import FieldMatrix, row_reduce
from .ltcode import CodeParams, DecodeReport, EncodingSymbol, neighbors_batch, peel, xor_rows
from .mldec import inactivation_solve, ml_decode
from .prng import SplitMix64, mix

GSTAR_RETRY_CAP = 1000


class ConstructionError(RuntimeError):
    """Raised when G* cannot be built within the retry cap."""


# ---------------------------------------------------------------- Hamming


@dataclass(frozen=True, eq=False)
class HammingCode:
    r: int
    extended: bool
    n: int
    H: FieldMatrix


def _column_bits(value: int, r: int) -> list[int]:
    return [(value >> (r - 1 - row)) & 1 for row in range(r)]


def hamming_build(r: int, extended: bool = False) -> HammingCode:
    """Parity-check matrix whose column j (1-based) is j written in binary, top row most significant."""
    if r < 2:
        raise ValueError("Hamming codes need r >= 2")
    cols = [_column_bits(v, r) for v in range(1, 2**r)]
    h = np.array(cols, dtype=np.int64).T
    if extended:
        h = np.hstack([h, np.zeros((r, 1), dtype=np.int64)])
        h = np.vstack([h, np.ones((1, h.shape[1]), dtype=np.int64)])
    return HammingCode(r, extended, h.shape[1], FieldMatrix.from_array(h, 2))


def linear_erase_decode(h: FieldMatrix, values: np.ndarray, erased: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fill erased positions of a codeword from the parity checks ``h``.

    Returns the filled values and the mask of positions still unknown. A
    position is filled only when the checks pin it down uniquely.
    """
    values = np.array(values, dtype=np.uint8, copy=True)
    erased = np.asarray(erased, dtype=bool).copy()
    idx = np.flatnonzero(erased)
    if idx.size == 0:
        return values, erased
    dense = h.entries
    known = np.flatnonzero(~erased)
    syndrome = np.zeros((h.rows, values.shape[1]), dtype=np.uint8)
    for row in range(h.rows):
        hits = known[dense[row, known] == 1]
        if hits.size:
            syndrome[row] = np.bitwise_xor.reduce(values[hits], axis=0)
    sub = FieldMatrix.from_array(dense[:, idx].T, 2)
    rep = ml_decode(sub, syndrome)
    values[idx[rep.recovered]] = rep.values[rep.recovered]
    erased[idx[rep.recovered]] = False
    return values, erased


def hamming_erase_decode(c: HammingCode, values: np.ndarray, erased: np.ndarray) -> np.ndarray | None:
    """Filled word, or ``None`` when the erased columns of H are dependent."""
    values = np.asarray(values, dtype=np.uint8)
    if values.shape[0] != c.n or len(erased) != c.n:
        raise ValueError(f"word length must be {c.n}")
    filled, left = linear_erase_decode(c.H, values.reshape(c.n, -1), erased)
    if left.any():
        return None
    return filled.reshape(values.shape)


def count_correctable(r: int, tau: int) -> int:
    """Number of weight-tau erasure patterns a length 2^r - 1 Hamming code corrects."""
    if not 1 <= tau <= r:
        raise ValueError("need 1 <= tau <= r")
    num = math.prod(2**r - 2**i for i in range(tau))
    return num // math.factorial(tau)


def hamming_pattern_polynomial(r: int) -> list[int]:
    """Coefficients of s^1..s^r in the correctable-pattern generating function."""
    return [count_correctable(r, tau) for tau in range(1, r + 1)]


# ---------------------------------------------------------------- LDPC


@dataclass(frozen=True, eq=False)
class LdpcCode:
    n: int
    l: int
    r: int
    seed: int
    H: FieldMatrix
    collapsed_edges: int = 0

    @property
    def m(self) -> int:
        return self.H.rows

    def check_sets(self) -> list[list[int]]:
        dense = self.H.entries
        return [np.flatnonzero(row).tolist() for row in dense]


def seeded_permutation(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle driven by SplitMix64."""
    rng = SplitMix64(mix(seed, 0x1D9C))
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def ldpc_build(n: int, l: int, r: int, seed: int = 0) -> LdpcCode:
    """Socket-matching (l, r)-regular code; multi-edges collapse to one edge."""
    if n < 1 or l < 1 or r < 1 or (n * l) % r:
        raise ValueError("n*l must be a positive multiple of r")
    m = n * l // r
    perm = seeded_permutation(n * l, seed)
    counts = np.zeros((m, n), dtype=np.int64)
    for socket, target in enumerate(perm):
        counts[target // r, socket // l] += 1
    collapsed = int((counts - (counts > 0)).sum())
    return LdpcCode(n, l, r, seed, FieldMatrix.from_array((counts > 0).astype(np.int64), 2), collapsed)


def ldpc_from_matrix(h: np.ndarray, seed: int = 0) -> LdpcCode:
    """Wrap an explicit regular parity-check matrix."""
    h = np.asarray(h, dtype=np.int64)
    col_w = set(h.sum(axis=0).tolist())
    row_w = set(h.sum(axis=1).tolist())
    if len(col_w) != 1 or len(row_w) != 1:
        raise ValueError("matrix is not regular")
    return LdpcCode(h.shape[1], col_w.pop(), row_w.pop(), seed, FieldMatrix.from_array(h, 2))


def is_stopping_set(checks: Sequence[Sequence[int]], subset: set[int]) -> bool:
    """Every check meets the subset zero times or at least twice."""
    return all(sum(v in subset for v in row) != 1 for row in checks)


def ldpc_erase_decode(c: LdpcCode, values: np.ndarray, erased: np.ndarray) -> tuple[np.ndarray, set[int]]:
    """Peel checks with a single erased neighbour; returns filled values and the residual erasures."""
    values = np.array(values, dtype=np.uint8, copy=True)
    if values.shape[0] != c.n or len(erased) != c.n:
        raise ValueError(f"word length must be {c.n}")
    flat = values.reshape(c.n, -1)
    checks = c.check_sets()
    missing = {int(i) for i in np.flatnonzero(erased)}
    var_checks: list[list[int]] = [[] for _ in range(c.n)]
    for ci, row in enumerate(checks):
        for v in row:
            var_checks[v].append(ci)
    pending = [sum(v in missing for v in row) for row in checks]
    queue = [ci for ci, cnt in enumerate(pending) if cnt == 1]
    while queue:
        ci = queue.pop()
        if pending[ci] != 1:
            continue
        v = next(u for u in checks[ci] if u in missing)
        others = [u for u in checks[ci] if u != v]
        flat[v] = xor_rows(flat, others)
        missing.discard(v)
        for cj in var_checks[v]:
            pending[cj] -= 1
            if pending[cj] == 1:
                queue.append(cj)
    return values, missing


# ---------------------------------------------------------------- systematic precode wrapper


@dataclass(frozen=True, eq=False)
class SystematicPrecode:
    """A precode laid out data-first: positions ``0..k-1`` carry the message, the rest parity."""

    kind: str
    k: int
    n: int
    H: FieldMatrix
    parity_rows: tuple[tuple[int, ...], ...]
    source: HammingCode | LdpcCode | None = None

    def encode(self, data: np.ndarray) -> np.ndarray:
        data = np.asarray(data, dtype=np.uint8)
        if data.shape[0] != self.k:
            raise ValueError(f"precode expects {self.k} data symbols")
        word = np.zeros((self.n, data.shape[1]), dtype=np.uint8)
        word[: self.k] = data
        for j, deps in enumerate(self.parity_rows):
            word[self.k + j] = xor_rows(word, deps)
        return word

    def erase_decode(self, values: np.ndarray, erased: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "ldpc":
            wrapped = LdpcCode(self.n, 0, 0, 0, self.H)
            filled, left = ldpc_erase_decode(wrapped, values, erased)
            mask = np.zeros(self.n, dtype=bool)
            mask[list(left)] = True
            return filled, mask
        return linear_erase_decode(self.H, values, erased)


def hamming_precode(k: int, r: int, extended: bool = False) -> SystematicPrecode:
    """Shortened Hamming code on ``k`` data symbols.

    Data columns are the first ``k`` weight >= 2 column patterns in ascending
    order and parity column ``j`` is the unit vector on row ``j``; the extended
    form adds the all-ones row and one more unit column.
    """
    if r < 2 or 2**r - 1 - r < k:
        raise ValueError(f"r={r} cannot protect k={k} data symbols (need 2^r - 1 - r >= k)")
    data_vals = [v for v in range(1, 2**r) if v & (v - 1)][:k]
    parity_vals = [1 << (r - 1 - j) for j in range(r)]
    cols = [_column_bits(v, r) for v in data_vals + parity_vals]
    h = np.array(cols, dtype=np.int64).T
    parity_rows = [tuple(i for i, v in enumerate(data_vals) if h[j, i]) for j in range(r)]
    if extended:
        h = np.hstack([h, np.zeros((r, 1), dtype=np.int64)])
        h = np.vstack([h, np.ones((1, h.shape[1]), dtype=np.int64)])
        parity_rows.append(tuple(range(k + r)))
    return SystematicPrecode("hamming", k, h.shape[1], FieldMatrix.from_array(h, 2), tuple(parity_rows), hamming_build(r, extended))


def ldpc_precode(code: LdpcCode) -> SystematicPrecode:
    """Reorder an LDPC code so its information positions come first.

    Pivot columns of the reduced parity-check matrix become parity symbols;
    the free columns carry data, so ``k = n - rank(H)``.
    """
    red = row_reduce(code.H, jordan=True)
    pivots = red.pivots
    free = [j for j in range(code.n) if j not in set(pivots)]
    order = free + pivots
    dense = FieldMatrix(code.H.rows, code.n, 2, red.data).entries[: red.rank]
    parity_rows = []
    pos = {col: i for i, col in enumerate(order)}
    for row in dense:
        parity_rows.append(tuple(pos[j] for j in free if row[j]))
    h_perm = code.H.entries[:, order]
    return SystematicPrecode("ldpc", len(free), code.n, FieldMatrix.from_array(h_perm, 2), tuple(parity_rows), code)


def parse_precode(text: str, k: int) -> SystematicPrecode | None:
    """Build a precode from ``type=hamming r= extended=`` or ``type=ldpc n= l= r= seed=``."""
    fields = dict(tok.split("=", 1) for tok in text.split())
    kind = fields.get("type")
    if kind == "none":
        return None
    if kind == "hamming":
        return hamming_precode(k, int(fields["r"]), fields.get("extended", "0") == "1")
    if kind == "ldpc":
        code = ldpc_build(int(fields["n"]), int(fields["l"]), int(fields["r"]), int(fields.get("seed", "0")))
        pre = ldpc_precode(code)
        if pre.k != k:
            raise ValueError(f"LDPC code carries {pre.k} data symbols, message has {k}")
        return pre
    raise ValueError(f"unknown precode type {kind!r}")


def read_precode(path: str | Path, k: int) -> SystematicPrecode | None:
    return parse_precode(Path(path).read_text(), k)


# ---------------------------------------------------------------- G*


def gstar_degrees_ok(degrees: Sequence[int]) -> bool:
    """Sorted degrees must satisfy d_(i) <= i."""
    return all(d <= i for i, d in enumerate(sorted(degrees), start=1))


@dataclass(frozen=True, eq=False)
class GStar:
    k: int
    checks: tuple[tuple[int, ...], ...]
    degrees: tuple[int, ...]
    order: tuple[int, ...]
    retries: int


def gstar_build(k: int, d: DegreeDistribution, seed: int = 0, retry_cap: int = GSTAR_RETRY_CAP) -> GStar:
    """k x k generator whose checks peel one new auxiliary symbol each, in degree order."""
    if k < 1:
        raise ValueError("k must be positive")
    rng = SplitMix64(mix(seed, 0x65A7))
    fixed = [1, 2][:k]
    star = omega_star(d) if k > 2 else None
    for attempt in range(retry_cap + 1):
        degrees = fixed + [sample_degree(star, rng.uniform()) for _ in range(k - len(fixed))]
        if gstar_degrees_ok(degrees):
            break
    else:
        raise ConstructionError(f"degree check failed {retry_cap + 1} times (k={k})")
    order = sorted(range(k), key=lambda i: (degrees[i], i))
    unrecovered = list(range(k))
    recovered: list[int] = []
    checks: list[tuple[int, ...]] = [()] * k
    for c in order:
        pick = rng.below(len(unrecovered))
        unrecovered[pick], unrecovered[-1] = unrecovered[-1], unrecovered[pick]
        fresh = unrecovered.pop()
        old: set[int] = set()
        for j in range(len(recovered) - (degrees[c] - 1), len(recovered)):
            t = rng.below(j + 1)
            old.add(j if t in old else t)
        checks[c] = tuple(sorted([fresh] + [recovered[i] for i in old]))
        recovered.append(fresh)
    return GStar(k, tuple(checks), tuple(degrees), tuple(order), attempt)


def _fixed_above(t: int, fixed: Sequence[int]) -> int:
    return sum(f > t for f in fixed)


def gstar_failure_probability(k: int, d: DegreeDistribution, prune: float = 1e-40) -> float:
    """Probability that the degree check rejects a draw.

    Draws are ``k - 2`` i.i.d. degrees from ``d`` next to the fixed degrees 1
    and 2. Sweeping the threshold t downward, the count N_t of draws above t
    grows by a binomial at each step, and the check asks N_t + #fixed above t
    <= k - t. Mass violating that bound is tallied directly, which keeps tiny
    failure probabilities accurate. States below ``prune`` are dropped.
    """
    fixed = [1, 2][: min(k, 2)]
    draws = k - len(fixed)
    if draws == 0:
        return 0.0 if gstar_degrees_ok(fixed) else 1.0
    probs = d.probs
    cdf = np.concatenate(([0.0], np.cumsum(probs)))
    top = max(d.dmax, k)
    state = np.array([1.0])
    fail = 0.0
    for t in range(top, 0, -1):
        if t <= k:
            limit = k - t - _fixed_above(t, fixed)
            if limit < 0:
                return fail + state.sum()
            if state.size > limit + 1:
                fail += state[limit + 1:].sum()
                state = state[: limit + 1]
        if t == 1:
            break
        mass_t = probs[t - 1] if t <= d.dmax else 0.0
        below_or_at = cdf[min(t, d.dmax)]
        if mass_t == 0.0 or below_or_at <= 0.0:
            continue
        p = min(1.0, mass_t / below_or_at)
        new = np.zeros(draws + 1)
        for a in np.flatnonzero(state > prune).tolist():
            rest = draws - a
            new[a:] += state[a] * binom.pmf(np.arange(rest + 1), rest, p)
        state = np.trim_zeros(new, "b") if new.any() else np.array([0.0])
    return float(fail)


def gstar_feasibility(k: int, d: DegreeDistribution) -> float:
    """Probability that a degree draw passes the check, by the threshold recursion."""
    return 1.0 - gstar_failure_probability(k, d)


def gstar_feasibility_mc(k: int, d: DegreeDistribution, trials: int, seed: int = 0, chunk: int = 20000) -> tuple[float, float]:
    """Monte Carlo pass rate and its standard error."""
    rng = np.random.default_rng(seed)
    fixed = np.array([1, 2][: min(k, 2)])
    limits = np.arange(1, k + 1)
    passed = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        draws = sample_degrees(d, rng.random((m, k - fixed.size)))
        allv = np.sort(np.hstack([np.broadcast_to(fixed, (m, fixed.size)), draws]), axis=1)
        passed += int(np.all(allv <= limits, axis=1).sum())
        done += m
    rate = passed / trials
    return rate, math.sqrt(max(rate * (1 - rate), 1.0 / trials) / trials)


# ---------------------------------------------------------------- concatenation


@dataclass(frozen=True, eq=False)
class ConcatParams:
    k: int
    precode: SystematicPrecode | None
    lt: CodeParams
    systematic: bool = False
    gstar_seed: int | None = None

    def __post_init__(self) -> None:
        inter = self.precode.n if self.precode is not None else self.k
        if self.precode is not None and (self.precode.k != self.k or not self.k < inter):
            raise ValueError("precode must map k data symbols to more than k intermediates")
        if self.lt.k != inter:
            raise ValueError(f"LT layer must run over {inter} intermediate symbols, not {self.lt.k}")

    @property
    def k_prime(self) -> int:
        return self.lt.k

    @property
    def graph_seed(self) -> int:
        return self.gstar_seed if self.gstar_seed is not None else mix(self.lt.base_seed, 0x6E57)


@dataclass
class ConcatEncoder:
    """Lazily extensible symbol stream for a concatenated code."""

    params: ConcatParams
    message: np.ndarray
    auxiliary: np.ndarray
    gstar: GStar | None = None
    _cache: dict = field(default_factory=dict)

    def symbol(self, esi: int) -> EncodingSymbol:
        return self.symbols([esi])[0]

    def symbols(self, esis: Sequence[int]) -> list[EncodingSymbol]:
        p = self.params
        out: list[EncodingSymbol | None] = [None] * len(esis)
        coded = []
        for i, e in enumerate(esis):
            if p.systematic and e < p.k:
                out[i] = EncodingSymbol(int(e), self.message[e].tobytes())
            else:
                coded.append(i)
        if coded:
            rows = neighbors_batch(p.lt, [esis[i] for i in coded])
            for i, nb in zip(coded, rows):
                out[i] = EncodingSymbol(int(esis[i]), xor_rows(self.auxiliary, nb).tobytes())
        return out  # type: ignore[return-value]


def _intermediate(cp: ConcatParams, message: np.ndarray) -> np.ndarray:
    return cp.precode.encode(message) if cp.precode is not None else message.copy()


def concat_encode(cp: ConcatParams, message: np.ndarray | Sequence[bytes]) -> ConcatEncoder:
    msg = np.asarray(
        message if isinstance(message, np.ndarray) else [np.frombuffer(bytes(m), dtype=np.uint8) for m in message],
        dtype=np.uint8,
    )
    if msg.shape != (cp.k, cp.lt.symbol_size):
        raise ValueError(f"message must hold {cp.k} payloads of {cp.lt.symbol_size} bytes")
    inter = _intermediate(cp, msg)
    if not cp.systematic:
        return ConcatEncoder(cp, msg, inter)
    graph = gstar_build(cp.k_prime, cp.lt.dist, cp.graph_seed)
    rep = peel(cp.k_prime, graph.checks, inter)
    if not rep.success:
        raise ConstructionError("G* failed to peel; construction invariant broken")
    return ConcatEncoder(cp, msg, rep.values, graph)


def _constraint_rows(cp: ConcatParams, graph: GStar | None) -> list[list[int]]:
    """Precode parity checks as zero-valued equations over the LT input symbols.

    Without G* the LT inputs are the codeword itself; with it, codeword
    position j is the XOR of the G* neighbours of j, so each check becomes
    the symmetric difference of those neighbour sets.
    """
    if cp.precode is None:
        return []
    out = []
    for row in cp.precode.H.entries:
        support = np.flatnonzero(row).tolist()
        if graph is None:
            out.append(support)
            continue
        acc: set[int] = set()
        for j in support:
            acc ^= set(graph.checks[j])
        out.append(sorted(acc))
    return [r for r in out if r]


def concat_decode(cp: ConcatParams, received: Sequence[EncodingSymbol], decoder: str = "inactivation") -> DecodeReport:
    """Recover the LT input symbols, rebuild codeword symbols, then let the precode fill gaps.

    The inactivation and ml decoders also carry the precode checks inside
    the linear system; bp peels the LT layer alone before the precode runs.
    """
    size = cp.lt.symbol_size
    kp = cp.k_prime
    esis = [s.esi for s in received]
    if len(set(esis)) != len(esis):
        raise ValueError("duplicate ESI in received symbols")
    payloads = np.zeros((len(received), size), dtype=np.uint8)
    for i, s in enumerate(received):
        if len(s.payload) != size:
            raise ValueError(f"payload of ESI {s.esi} has {len(s.payload)} bytes, expected {size}")
        payloads[i] = np.frombuffer(s.payload, dtype=np.uint8)
    data = np.zeros((cp.k, size), dtype=np.uint8)
    have = np.zeros(cp.k, dtype=bool)
    if cp.systematic:
        for i, e in enumerate(esis):
            if e < cp.k:
                data[e] = payloads[i]
                have[e] = True
        if have.all():
            return DecodeReport("success", data, have)
    graph = gstar_build(kp, cp.lt.dist, cp.graph_seed) if cp.systematic else None
    rows: list[list[int]] = [[]] * len(esis)
    coded = [i for i, e in enumerate(esis) if not (cp.systematic and e < cp.k)]
    for i, nb in zip(coded, neighbors_batch(cp.lt, [esis[i] for i in coded]) if coded else []):
        rows[i] = nb.tolist()
    if graph is not None:
        for i, e in enumerate(esis):
            if e < cp.k:
                rows[i] = list(graph.checks[e])
    if decoder == "bp":
        rep = peel(kp, rows, payloads, keys=esis)
    elif decoder in ("inactivation", "ml"):
        extra = _constraint_rows(cp, graph)
        keys = esis + [(1 << 32) + i for i in range(len(extra))]
        zeros = np.zeros((len(extra), size), dtype=np.uint8)
        rep = inactivation_solve(kp, rows + extra, np.vstack([payloads, zeros]), keys=keys)
    else:
        raise ValueError(f"unknown decoder {decoder!r}")
    if graph is None:
        word, known = rep.values, rep.recovered.copy()
    else:
        word = np.zeros((kp, size), dtype=np.uint8)
        known = np.zeros(kp, dtype=bool)
        for j in range(kp):
            if j < cp.k and have[j]:
                word[j] = data[j]
                known[j] = True
            elif rep.recovered[list(graph.checks[j])].all():
                word[j] = xor_rows(rep.values, graph.checks[j])
                known[j] = True
    if cp.precode is not None and not known[: cp.k].all():
        word, missing = cp.precode.erase_decode(word, ~known)
        known = ~missing
    data = word[: cp.k].copy()
    got = known[: cp.k].copy()
    status = "success" if got.all() else "stalled"
    return DecodeReport(status, data, got, rep.ripple_trace, inactivation_count=rep.inactivation_count, rank=rep.rank)
