"""``xsect`` command line.

Exit codes: 0 success, 1 usage error, 2 degenerate single query, 3 I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import re
import sys
from typing import List, Optional

from . import dataset, harness
from .expansion import OracleError
from .oracle import intersect_reference, relative_point_error
from .sphere import METHODS, ArcLatQuery, DegenerateArc, DegenerateEquatorial, Vec3, intersect

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _methods(text: str) -> List[str]:
    ms = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in ms if m not in METHODS]
    if bad or not ms:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    return ms


def _int_list(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive integers")
    return vals


def _number(text: str) -> float:
    try:
        return float.fromhex(text) if "0x" in text.lower() else float(text)
    except ValueError:
        raise ValueError(f"cannot parse number {text!r}") from None


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            yield f


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xsect", description="Arc / constant-latitude intersection toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a dataset")
    g.add_argument("--kind", choices=("primary", "illcond"), default="primary")
    g.add_argument("--seed", type=int, default=42)
    g.add_argument("--per-band", type=int, default=1000)
    g.add_argument("--per-decade", type=int, default=500)
    g.add_argument("--out", required=True)
    g.add_argument("--format", choices=("jsonl", "txt"), default=None,
                   help="record format (default: txt for *.txt, else jsonl)")

    a = sub.add_parser("accuracy", help="per-group error against the oracle")
    a.add_argument("data")
    a.add_argument("--methods", type=_methods, default=list(METHODS))
    a.add_argument("--out")
    a.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    b = sub.add_parser("bench", help="kernel throughput")
    b.add_argument("--data", help="dataset file (default: random queries)")
    b.add_argument("--n", type=int, default=100_000, help="random queries when --data is absent")
    b.add_argument("--seed", type=int, default=42)
    b.add_argument("--methods", type=_methods, default=list(METHODS))
    b.add_argument("--lanes", type=_int_list, default=[1])
    b.add_argument("--threads", type=_int_list, default=None)
    b.add_argument("--chunk", type=int, default=4096)
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--out")
    b.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    i = sub.add_parser("intersect", help="evaluate one query")
    i.add_argument("query", nargs="*",
                   help="x1 y1 z1 x2 y2 z2 z0 as hex or decimal (read from stdin if omitted)")
    i.add_argument("--methods", type=_methods, default=["accux"])
    i.add_argument("--oracle", action="store_true", help="also print the reference and errors")
    # Let "-0x1p+0", "-.5" and "-inf" through as values rather than options.
    i._negative_number_matcher = re.compile(r"^-(?:\d|\.\d|0x|inf|nan)", re.IGNORECASE)

    d = sub.add_parser("dump-intermediates", help="mean error of intermediate results")
    d.add_argument("data")
    d.add_argument("--methods", type=_methods, default=["accux"])
    d.add_argument("--out")
    d.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return p


def _cmd_gen(args) -> int:
    if args.per_band < 0 or args.per_decade < 0:
        print("xsect: counts must be non-negative", file=sys.stderr)
        return EXIT_USAGE
    if args.kind == "primary":
        recs = dataset.gen_primary(args.seed, per_band=args.per_band)
    else:
        recs = dataset.gen_illcond(args.seed, per_decade=args.per_decade)
    fmt = args.format or ("txt" if args.out.endswith(".txt") else "jsonl")
    dataset.write_records(recs, args.out, fmt)
    print(f"wrote {len(recs)} records to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_accuracy(args) -> int:
    recs = dataset.read_records(args.data)
    rows = harness.accuracy_rows(recs, args.methods)
    with _output(args.out) as f:
        harness.write_rows(rows, harness.AccuracyRow, harness.ACCURACY_SCHEMA, f, args.format)
    return EXIT_OK


def _cmd_bench(args) -> int:
    from .sphere import QueryArrays

    if args.data:
        qa = QueryArrays.from_queries([r.query for r in dataset.read_records(args.data)])
    else:
        qa = harness.random_queries(args.seed, args.n)
    threads = args.threads or [harness.default_threads()]
    rows = harness.bench_rows(qa, args.methods, args.lanes, threads, args.chunk, args.repeats)
    meta = harness.host_metadata()
    meta.update({k: f"{v:.3f}" for k, v in harness.bench_ratios(rows).items()})
    with _output(args.out) as f:
        harness.write_rows(rows, harness.BenchRow, harness.BENCH_SCHEMA, f, args.format, meta)
    return EXIT_OK


def _fmt_point(p) -> str:
    hexs = ", ".join(float(v).hex() for v in p)
    dec = ", ".join(repr(float(v)) for v in p)
    return f"({hexs})  = ({dec})"


def _cmd_intersect(args) -> int:
    tokens = args.query or sys.stdin.read().split()
    try:
        if len(tokens) != 7:
            raise ValueError(f"expected 7 numbers, got {len(tokens)}")
        v = [_number(t) for t in tokens]
    except ValueError as exc:
        print(f"xsect: {exc}", file=sys.stderr)
        return EXIT_USAGE
    q = ArcLatQuery(Vec3(*v[:3]), Vec3(*v[3:6]), v[6])
    ref = None
    if args.oracle:
        try:
            ref = intersect_reference(q)
        except (DegenerateArc, DegenerateEquatorial) as exc:
            print(type(exc).__name__)
            return EXIT_DEGENERATE
        except OracleError as exc:
            print(f"xsect: oracle failed: {exc}", file=sys.stderr)
    for m in args.methods:
        try:
            sol = intersect(q, m)
        except (DegenerateArc, DegenerateEquatorial) as exc:
            print(type(exc).__name__)
            return EXIT_DEGENERATE
        except ValueError as exc:
            print(f"xsect: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"{m}: {sol.classification}")
        for k, p in enumerate(sol.points, 1):
            line = f"  p{k} = {_fmt_point(p)}"
            if ref is not None and k <= len(ref.points):
                line += f"  rel_err = {relative_point_error(p, ref.points[k - 1]):.3e}"
            print(line)
    if ref is not None:
        print(f"oracle: {ref.classification}")
        for k, p in enumerate(ref.points, 1):
            print(f"  p{k} = {_fmt_point(p.rounded)}")
    return EXIT_OK


def _cmd_dump(args) -> int:
    recs = dataset.read_records(args.data)
    rows = []
    for m in args.methods:
        for r in harness.intermediate_rows(recs, m):
            rows.append(harness.IntermediateRow(f"{m}:{r.quantity}", r.mean_rel_err,
                                                r.mean_rel_err_u, r.n))
    if not recs:
        rows = []
    with _output(args.out) as f:
        harness.write_rows(rows, harness.IntermediateRow, harness.INTERMEDIATES_SCHEMA, f,
                           args.format)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "accuracy": _cmd_accuracy,
    "bench": _cmd_bench,
    "intersect": _cmd_intersect,
    "dump-intermediates": _cmd_dump,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except dataset.RecordParseError as exc:
        print(f"xsect: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"xsect: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"xsect: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
