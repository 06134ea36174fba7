"""Command-line front end: encode, decode, simulate, bounds, design, evolve, precode-info."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import analysis
from .dist import (
    DegreeDistribution,
    avg_degree,
    format_distribution,
    raptor_reference,
    read_distribution,
    robust_soliton,
    soliton,
    table1_reference,
)
from .ltcode import (
    DIST_IDS,
    FLAG_LENGTH_TRAILER,
    FLAG_SYSTEMATIC,
    PACKET_HEADER,
    CodeParams,
    EncodingSymbol,
    generator_matrix,
    pack_packet,
    unpack_packet,
)
from .mldec import ml_decode
from .precode import (
    ConcatParams,
    concat_decode,
    concat_encode,
    hamming_pattern_polynomial,
    read_precode,
)
from .sim import CodecConfig, read_config, run_curve, write_csv

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_STALL = 0, 1, 2, 3
TRAILER_BYTES = 8
DIST_NAMES = {name: i for i, name in DIST_IDS.items()}

EPILOG = """\
Exit codes: 0 success, 1 usage error, 2 I/O error, 3 decode stall.

Padding: an input shorter than k * symbol_size is zero-padded. Unless it
fills the block exactly, its true byte length is written as a 64-bit
little-endian integer into the last 8 bytes of the block, and packets carry
flag bit 1 so decode strips the padding again. Inputs of more than
k * symbol_size - 8 bytes (but short of the full block) are rejected.
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dist_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", choices=sorted(DIST_NAMES), default="robust")
    p.add_argument("--dist-file", help="distribution file for --dist file")
    p.add_argument("--c", type=float, default=0.1, help="robust soliton constant c")
    p.add_argument("--delta", type=float, default=0.5, help="robust soliton failure bound delta")


def _code_flags(p: argparse.ArgumentParser) -> None:
    _dist_flags(p)
    p.add_argument("--precode", help="precode description file (type=hamming r=... or type=ldpc ...)")


def build_distribution(name: str, k: int, c: float = 0.1, delta: float = 0.5, dist_file: str | None = None) -> DegreeDistribution:
    """Distribution for registry name ``name`` over ``k`` input symbols."""
    if name == "soliton":
        return soliton(k)
    if name == "robust":
        return robust_soliton(k, c, delta)
    if name == "raptor_ref":
        return raptor_reference()
    if name in ("table1_4096", "table1_8192"):
        ref = table1_reference(int(name.split("_")[1]))
        return DegreeDistribution(ref.probs, None, ref.name)
    if name == "file":
        if not dist_file:
            raise UsageError("--dist file needs --dist-file")
        d = read_distribution(dist_file)
        return d if d.k in (None, k) else DegreeDistribution(d.probs, None, d.name)
    raise UsageError(f"unknown distribution {name!r}")


def _concat_params(k: int, ss: int, dist_id: int, seed: int, systematic: bool, args) -> ConcatParams:
    pre = read_precode(args.precode, k) if args.precode else None
    inter = pre.n if pre is not None else k
    dist = build_distribution(DIST_IDS[dist_id], inter, args.c, args.delta, args.dist_file)
    lt = CodeParams(inter, ss, dist, seed, dist_id)
    return ConcatParams(k, pre, lt, systematic)


def _read_bytes(path: str | None) -> bytes:
    if path in (None, "-"):
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from exc


def _write_bytes(path: str | None, data: bytes) -> None:
    if path in (None, "-"):
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def pad_message(data: bytes, k: int, ss: int) -> tuple[np.ndarray, int]:
    """Block of k symbols plus the packet flags describing the padding."""
    cap = k * ss
    if len(data) > cap:
        raise UsageError(f"input has {len(data)} bytes, more than k * symbol_size = {cap}")
    flags = 0
    block = bytearray(cap)
    block[: len(data)] = data
    if len(data) < cap:
        if len(data) > cap - TRAILER_BYTES:
            raise UsageError(f"input of {len(data)} bytes leaves no room for the 8-byte length trailer; raise k")
        block[cap - TRAILER_BYTES:] = len(data).to_bytes(TRAILER_BYTES, "little")
        flags |= FLAG_LENGTH_TRAILER
    return np.frombuffer(bytes(block), dtype=np.uint8).reshape(k, ss), flags


def unpad_message(block: bytes, flags: int) -> bytes:
    if not flags & FLAG_LENGTH_TRAILER:
        return block
    length = int.from_bytes(block[-TRAILER_BYTES:], "little")
    if length > len(block) - TRAILER_BYTES:
        raise ValueError("length trailer exceeds the block")
    return block[:length]


def cmd_encode(args) -> int:
    if args.k < 1 or args.symbol_size < 1 or args.count < 0:
        raise UsageError("k, symbol-size must be positive and count non-negative")
    data = _read_bytes(args.input)
    message, flags = pad_message(data, args.k, args.symbol_size)
    if args.systematic:
        flags |= FLAG_SYSTEMATIC
    try:
        cp = _concat_params(args.k, args.symbol_size, DIST_NAMES[args.dist], args.seed, args.systematic, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    enc = concat_encode(cp, message)
    out = bytearray()
    for sym in enc.symbols(range(args.count)):
        out += pack_packet(cp.lt, sym, flags, args.k)
    _write_bytes(args.output, bytes(out))
    return EXIT_OK


def parse_packets(stream: bytes) -> list[tuple]:
    packets = []
    pos = 0
    while pos < len(stream):
        if len(stream) - pos < PACKET_HEADER.size:
            raise UsageError("truncated packet header at end of stream")
        size = PACKET_HEADER.unpack_from(stream, pos)[4]
        end = pos + PACKET_HEADER.size + size
        if end > len(stream):
            raise UsageError("truncated packet payload at end of stream")
        try:
            packets.append(unpack_packet(stream[pos:end]))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        pos = end
    return packets


def cmd_decode(args) -> int:
    packets = parse_packets(_read_bytes(args.input))
    if not packets:
        raise UsageError("no packets in input")
    first = packets[0][0]
    key = lambda h: (h.flags, h.k, h.symbol_size, h.dist_id, h.base_seed)
    if any(key(h) != key(first) for h, _ in packets):
        raise UsageError("packets disagree on flags, k, symbol size, distribution or seed")
    if first.dist_id not in DIST_IDS:
        raise UsageError(f"unknown dist_id {first.dist_id}")
    seen: dict[int, bytes] = {}
    for h, payload in packets:
        seen.setdefault(h.esi, payload)
    received = [EncodingSymbol(e, p) for e, p in seen.items()]
    try:
        cp = _concat_params(first.k, first.symbol_size, first.dist_id, first.base_seed, first.systematic, args)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.decoder == "ml" and cp.precode is None and not cp.systematic:
        g = generator_matrix(cp.lt, [s.esi for s in received])
        pay = np.array([np.frombuffer(s.payload, dtype=np.uint8) for s in received])
        rep = ml_decode(g, pay)
    else:
        rep = concat_decode(cp, received, args.decoder)
    if not rep.success:
        trace = rep.ripple_trace
        summary = f"len={len(trace)} min={min(trace)} mean={np.mean(trace):.3f}" if trace else "empty"
        print(
            f"decode stalled: recovered {rep.recovered_count}/{first.k} symbols; "
            f"ripple trace {summary}; inactivations {rep.inactivation_count}",
            file=sys.stderr,
        )
        return EXIT_STALL
    block = np.asarray(rep.values, dtype=np.uint8).tobytes()
    try:
        data = unpad_message(block, first.flags)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_bytes(args.output, data)
    print(f"decoded {first.k} symbols from {len(received)} packets; inactivations {rep.inactivation_count}", file=sys.stderr)
    return EXIT_OK


def parse_range(text: str) -> list[int]:
    """``a..b`` inclusive, or a comma list."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise UsageError(f"bad integer range {text!r}") from exc


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc


def _emit_csv(header: Sequence[str], rows: Sequence[Sequence], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([x if isinstance(x, (str, int)) else f"{x:.10g}" for x in row])
    _write_bytes(out, buf.getvalue().encode())


def cmd_bounds(args) -> int:
    diffs = parse_range(args.diff)
    if args.theorem in ("1", "2"):
        rows = []
        for diff in diffs:
            my = args.mx + diff
            if diff < 0:
                raise UsageError("--diff values must be non-negative")
            if args.theorem == "1":
                rows.append((args.q, args.mx, my, diff, analysis.full_rank_prob(args.mx, my, args.q)))
            else:
                b = analysis.ml_failure_bounds(args.mx, my, args.q)
                rows.append((args.q, args.mx, my, diff, b.lower, b.exact, b.upper))
        header = ["q", "mx", "my", "diff", "full_rank"] if args.theorem == "1" else ["q", "mx", "my", "diff", "lower", "exact", "upper"]
        _emit_csv(header, rows, args.output)
        return EXIT_OK
    if args.k is None:
        raise UsageError(f"--theorem {args.theorem} needs --k")
    d = build_distribution(args.dist, args.k, args.c, args.delta, args.dist_file)
    rows = []
    for diff in diffs:
        n = args.k + diff
        if args.theorem == "3":
            rows.append((args.k, n, analysis.symbol_ml_upper(args.k, n, d)))
        else:
            b = analysis.coverage_bounds(args.k, n, d)
            rows.append((args.k, n, b.lower, b.exact, b.upper))
    header = ["k", "n", "upper"] if args.theorem == "3" else ["k", "n", "lower", "exact", "upper"]
    _emit_csv(header, rows, args.output)
    return EXIT_OK


def cmd_evolve(args) -> int:
    d = build_distribution(args.dist, args.k, args.c, args.delta, args.dist_file)
    trace = analysis.and_or_evolution(d, args.eps, args.max_iters)
    _emit_csv(["l", "y"], [(i, y) for i, y in enumerate(trace.y.tolist())], args.output)
    state = "converged" if trace.converged else "hit the iteration cap"
    print(f"fixed point {trace.fixed_point:.10g} ({state} after {trace.y.size - 1} steps)", file=sys.stderr)
    return EXIT_OK


def cmd_design(args) -> int:
    dgamma = args.dgamma if args.dgamma is not None else args.gamma
    try:
        d, lp = analysis.design_distribution(args.k, args.eps, args.gamma, dgamma, args.F)
    except analysis.InfeasibleLpError as exc:
        print(f"design failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    check = analysis.check_distribution(d, args.k, args.eps, args.gamma, dgamma)
    if not check.passed:
        raise RuntimeError(f"designed distribution fails its own constraint at x={check.failing_x}")
    _write_bytes(args.output, format_distribution(d).encode())
    print(f"average degree {avg_degree(d):.10g}; {lp.pivots} simplex pivots", file=sys.stderr)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = dict(read_config(args.config)) if args.config else {}
    for key in ("codec", "k", "dist", "dist_file", "c", "delta", "overheads", "decoder", "trials", "seed", "workers", "epsilon0"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = str(val)
    try:
        k = int(cfg["k"])
        codec = cfg.get("codec", "lt")
        dist = None
        if codec == "lt":
            dist = build_distribution(cfg.get("dist", "robust"), k, float(cfg.get("c", 0.1)), float(cfg.get("delta", 0.5)), cfg.get("dist_file"))
        config = CodecConfig(codec, k, dist, float(cfg.get("epsilon0", 0.0)))
        overheads = parse_floats(cfg.get("overheads", "0"))
        records = run_curve(
            config,
            overheads,
            cfg.get("decoder", "ml" if codec == "dense" else "bp"),
            int(cfg.get("trials", 100)),
            int(cfg.get("seed", 0)),
            int(cfg.get("workers", 1)),
        )
    except KeyError as exc:
        raise UsageError(f"simulate needs {exc.args[0]}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    buf = io.StringIO()
    write_csv(records, buf)
    _write_bytes(args.output, buf.getvalue().encode())
    return EXIT_OK


def cmd_precode_info(args) -> int:
    if args.type == "hamming":
        if args.r is None:
            raise UsageError("hamming needs --r")
        coeffs = hamming_pattern_polynomial(args.r)
        _emit_csv(["tau", "correctable"], list(enumerate(coeffs, start=1)), args.output)
        return EXIT_OK
    if None in (args.n, args.l, args.r):
        raise UsageError("ldpc needs --n, --l and --r")
    gammas = parse_floats(args.gamma)
    rows = []
    for g in gammas:
        pb, pbit = analysis.ldpc_finite_length(args.n, args.l, args.r, g, args.reading)
        rows.append((args.n, args.l, args.r, g, pb, pbit))
    _emit_csv(["n", "l", "r", "gamma", "p_block", "p_bit"], rows, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fountain", description=__doc__, epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="encode a file into a packet stream", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--symbol-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--systematic", action="store_true")
    _code_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode a packet stream", epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--decoder", choices=("bp", "ml", "inactivation"), default="inactivation")
    _code_flags(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="Monte Carlo failure-rate curve as CSV")
    p.add_argument("--config", help="key=value file; flags override its entries")
    p.add_argument("--codec", choices=("dense", "lt"))
    p.add_argument("--k", type=int)
    p.add_argument("--dist", choices=sorted(DIST_NAMES))
    p.add_argument("--dist-file", dest="dist_file")
    p.add_argument("--c", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--overheads", help="comma-separated overhead values")
    p.add_argument("--decoder", choices=("bp", "ml", "inactivation"))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--epsilon0", type=float)
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="closed-form bound sweeps as CSV")
    p.add_argument("--theorem", choices=("1", "2", "3", "lb1"), required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--mx", type=int, default=32, help="rows (message symbols) for theorems 1 and 2")
    p.add_argument("--diff", default="0..20", help="my - mx (or n - k) values: a..b or a,b,c")
    p.add_argument("--k", type=int)
    _dist_flags(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("evolve", help="and-or tree evolution of the unrecovered fraction")
    p.add_argument("--k", type=int, default=1000, help="k used to build k-dependent distributions")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--max-iters", type=int, default=analysis.evolution.EVOLUTION_CAP)
    _dist_flags(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("design", help="LP design of a degree distribution")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--dgamma", type=float)
    p.add_argument("--F", type=int, default=40, help="maximum degree")
    p.add_argument("--output")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("precode-info", help="precode performance figures")
    p.add_argument("--type", choices=("hamming", "ldpc"), required=True)
    p.add_argument("--r", type=int, help="Hamming parity rows, or LDPC check degree")
    p.add_argument("--n", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--gamma", default="0.1", help="erasure fractions for ldpc, comma-separated")
    p.add_argument("--reading", choices=("edges", "printed"), default="edges")
    p.add_argument("--output")
    p.set_defaults(func=cmd_precode_info)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"fountain: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fountain: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
