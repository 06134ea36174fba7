"""Erasure channel and Monte Carlo failure-rate experiments."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .dist import DegreeDistribution
from .galois import FieldMatrix, gf2_rank_batch, mat_rank
from .ltcode import CodeParams, EncodingSymbol, neighbors_batch, peel
from .mldec import inactivation_solve
from .prng import GOLDEN, MASK64, draw_u64, finalize_array, mix

WILSON_Z = 1.959963984540054
DECODERS = ("bp", "ml", "inactivation")
CSV_HEADER = ("k", "overhead", "decoder", "trials", "failures", "rate", "lo", "hi")
_DENSE_CHUNK = 100_000


@dataclass(frozen=True)
class ChannelConfig:
    epsilon0: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError("erasure probability must lie in [0, 1]")

    def erasures(self, count: int) -> np.ndarray:
        """Boolean mask, True where the symbol at that position is lost."""
        rng = np.random.default_rng(self.seed)
        return rng.random(count) < self.epsilon0


def bec_transmit(symbols: Sequence[EncodingSymbol], ch: ChannelConfig) -> list[EncodingSymbol]:
    lost = ch.erasures(len(symbols))
    return [s for s, gone in zip(symbols, lost) if not gone]


def wilson_interval(failures: int, trials: int, z: float = WILSON_Z) -> tuple[float, float]:
    if trials < 1 or not 0 <= failures <= trials:
        raise ValueError("need 0 <= failures <= trials and trials >= 1")
    p = failures / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, centre - half)
    hi = 1.0 if failures == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class ExperimentRecord:
    k: int
    overhead: float
    decoder: str
    trials: int
    failures: int
    rate: float = field(init=False)
    lo: float = field(init=False)
    hi: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0 <= self.failures <= self.trials:
            raise ValueError("failures must lie in [0, trials]")
        lo, hi = wilson_interval(self.failures, self.trials)
        object.__setattr__(self, "rate", self.failures / self.trials)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass(frozen=True)
class CodecConfig:
    """What a trial encodes: ``kind="dense"`` is a uniform random binary code, ``"lt"`` an LT code."""

    kind: str
    k: int
    dist: DegreeDistribution | None = None
    epsilon0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("dense", "lt"):
            raise ValueError(f"unknown codec kind {self.kind!r}")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.kind == "lt" and self.dist is None:
            raise ValueError("an LT codec needs a degree distribution")
        if not 0.0 <= self.epsilon0 < 1.0:
            raise ValueError("channel erasure probability must lie in [0, 1)")


def received_count(k: int, overhead: float) -> int:
    return int(round((1.0 + overhead) * k))


def trial_seed(base_seed: int, point: int, trial: int) -> int:
    return mix(base_seed, point, trial)


def _trial_seeds(base_seed: int, point: int, trials: np.ndarray) -> np.ndarray:
    """Vector form of :func:`trial_seed` over many trial indices (< 2**64)."""
    head = np.uint64(mix(base_seed, point))
    with np.errstate(over="ignore"):
        return finalize_array(head ^ (trials.astype(np.uint64) * np.uint64(GOLDEN)))


def _surviving_esis(seed: int, n: int, epsilon0: float) -> list[int]:
    """ESIs of the first ``n`` symbols to get through the channel."""
    if epsilon0 == 0.0:
        return list(range(n))
    ch = ChannelConfig(epsilon0, mix(seed, 0xC4A))
    out: list[int] = []
    sent = 0
    while len(out) < n:
        batch = max(2 * (n - len(out)), 64)
        lost = ch.erasures(sent + batch)[sent:]
        out.extend((sent + np.flatnonzero(~lost)).tolist())
        sent += batch
    return out[:n]


def _lt_trial_fails(cfg: CodecConfig, decoder: str, n: int, seed: int) -> bool:
    p = CodeParams(cfg.k, 1, cfg.dist, seed & MASK64)
    esis = _surviving_esis(seed, n, cfg.epsilon0)
    rows = [r.tolist() for r in neighbors_batch(p, esis)] if esis else []
    if decoder == "bp":
        return not peel(cfg.k, rows, keys=esis).success
    if decoder == "ml":
        if n < cfg.k:
            return True
        return mat_rank(FieldMatrix.from_row_sets(rows, cfg.k)) < cfg.k
    zero = np.zeros((len(rows), 1), dtype=np.uint8)
    return not inactivation_solve(cfg.k, rows, zero, keys=esis).success


def _dense_failures(k: int, n: int, seeds: np.ndarray) -> int:
    """Rank-deficient draws among dense k x n binary codes, one per seed."""
    if n < k:
        return int(seeds.size)
    if k <= 64:
        mask = np.uint64((1 << k) - 1)
        cols = np.stack([draw_u64(seeds, m) & mask for m in range(n)], axis=1)
        return int((gf2_rank_batch(cols, k) < k).sum())
    words = (k + 63) // 64
    fails = 0
    for s in seeds:
        state = np.array([s], dtype=np.uint64)
        draws = np.concatenate([draw_u64(state, j) for j in range(n * words)]).reshape(n, words)
        bits = np.unpackbits(draws.view(np.uint8), axis=1, bitorder="little")[:, :k]
        fails += mat_rank(FieldMatrix.from_array(bits, 2)) < k
    return fails


def _count_failures(cfg: CodecConfig, decoder: str, n: int, base_seed: int, point: int, lo: int, hi: int) -> int:
    if cfg.kind == "dense":
        if decoder != "ml":
            raise ValueError("dense codes are decoded by ml only")
        fails = 0
        for start in range(lo, hi, _DENSE_CHUNK):
            stop = min(hi, start + _DENSE_CHUNK)
            fails += _dense_failures(cfg.k, n, _trial_seeds(base_seed, point, np.arange(start, stop)))
        return fails
    return sum(_lt_trial_fails(cfg, decoder, n, trial_seed(base_seed, point, t)) for t in range(lo, hi))


def run_curve(
    cfg: CodecConfig,
    overheads: Sequence[float],
    decoder: str,
    trials: int,
    base_seed: int = 0,
    workers: int = 1,
) -> list[ExperimentRecord]:
    """Failure counts over an overhead grid.

    Trial ``t`` at grid point ``i`` draws everything from
    ``mix(base_seed, i, t)``, so the counts do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if decoder not in DECODERS:
        raise ValueError(f"decoder must be one of {DECODERS}")
    jobs = []
    for point, eps in enumerate(overheads):
        n = received_count(cfg.k, eps)
        bounds = np.linspace(0, trials, max(1, workers) + 1).astype(int)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi > lo:
                jobs.append((point, (cfg, decoder, n, base_seed, point, int(lo), int(hi))))
    counts = [0] * len(overheads)
    if workers <= 1:
        for point, args in jobs:
            counts[point] += _count_failures(*args)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [(point, pool.submit(_count_failures, *args)) for point, args in jobs]
            for point, fut in futures:
                counts[point] += fut.result()
    return [ExperimentRecord(cfg.k, float(eps), decoder, trials, c) for eps, c in zip(overheads, counts)]


def unrecovered_fractions(d: DegreeDistribution, k: int, epsilon: float, trials: int, base_seed: int = 0) -> np.ndarray:
    """Fraction of inputs left unknown when peeling stalls, one value per trial."""
    n = received_count(k, epsilon)
    dist = d if d.k in (None, k) else DegreeDistribution(d.probs, k, d.name)
    out = np.empty(trials)
    for t in range(trials):
        p = CodeParams(k, 1, dist, trial_seed(base_seed, 0, t))
        rows = [r.tolist() for r in neighbors_batch(p, range(n))]
        out[t] = 1.0 - peel(k, rows).recovered_count / k
    return out


def unrecovered_fraction_experiment(d: DegreeDistribution, k: int, epsilon: float, trials: int, base_seed: int = 0) -> float:
    return float(unrecovered_fractions(d, k, epsilon, trials, base_seed).mean())


def _fmt(x: float | int | str) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.10g}"


def write_csv(records: Iterable[ExperimentRecord], out: TextIO | str | Path) -> None:
    if isinstance(out, (str, Path)):
        with open(out, "w", newline="") as fh:
            write_csv(records, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])


def records_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def parse_config(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value
    return out


def read_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())
