"""Accuracy sweeps, throughput benchmarks and intermediate-error profiles."""

from __future__ import annotations

import json
import math
import os
import platform
import statistics
import sys
import time
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from . import _fma
from .eft import U
from .expansion import OracleError
from .oracle import intersect_reference, reference_intermediates, relative_error, relative_point_error
from .sphere import (
    METHODS,
    Classification,
    DegenerateArc,
    DegenerateEquatorial,
    QueryArrays,
    accux_trace,
    canonicalize,
    canonicalize_arrays,
    intersect,
    naive_final_trace,
    run_kernel,
)

ACCURACY_SCHEMA = "xsect.accuracy/1"
BENCH_SCHEMA = "xsect.bench/1"
INTERMEDIATES_SCHEMA = "xsect.intermediates/1"

#: Widest block the array instantiation accepts; widths must be powers of two.
MAX_LANES = 65536

INTERMEDIATES = (
    "nx", "ny", "nz", "norm_n_sq", "norm_nxy_sq", "z0_sq", "n_sq_z0_sq", "s_sq", "s",
    "nx_nz", "numerator", "numerator_rounded", "denominator_rounded", "px",
)


@dataclass
class AccuracyRow:
    group: str
    method: str
    max_rel_err: float
    median_rel_err: float
    n: int
    missed: int = 0
    excluded: int = 0


@dataclass
class BenchRow:
    method: str
    lanes: int
    threads: int
    n: int
    wall_seconds: float
    queries_per_second: float
    checksum: str
    status: str = "ok"


@dataclass
class IntermediateRow:
    quantity: str
    mean_rel_err: float
    mean_rel_err_u: float
    n: int


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("XSECT_THREADS", "1")))
    except ValueError:
        return 1


def _point_errors(sol, ref) -> float:
    # Pair points in order; a tangent on either side is compared to both.
    comp, exact = sol.points, ref.points
    k = max(len(comp), len(exact))
    return max(
        relative_point_error(comp[min(i, len(comp) - 1)], exact[min(i, len(exact) - 1)])
        for i in range(k)
    )


def accuracy_rows(records, methods: Sequence[str] = METHODS,
                  target_bits: int = 212) -> List[AccuracyRow]:
    """Max and median point error per (group, method) against the oracle.

    Records the oracle cannot use (degenerate, or no intersection) are
    excluded and counted; a method that reports no intersection where the
    oracle finds one counts as missed for that method.
    """
    errs: Dict[tuple, List[float]] = {}
    missed: Dict[tuple, int] = {}
    excluded: Dict[str, int] = {}
    groups: List[str] = []
    for rec in records:
        g = rec.band
        if g not in excluded:
            excluded[g] = 0
            groups.append(g)
        try:
            ref = intersect_reference(rec.query, target_bits)
        except (DegenerateArc, DegenerateEquatorial, OracleError, ValueError):
            ref = None
        if ref is None or ref.classification is Classification.NO_INTERSECTION:
            excluded[g] += 1
            continue
        for m in methods:
            key = (g, m)
            errs.setdefault(key, [])
            try:
                sol = intersect(rec.query, m)
            except (DegenerateArc, DegenerateEquatorial, ValueError):
                sol = None
            if sol is None or not sol.points:
                missed[key] = missed.get(key, 0) + 1
                continue
            errs[key].append(_point_errors(sol, ref))
    rows = []
    for g in groups:
        for m in methods:
            e = errs.get((g, m), [])
            rows.append(AccuracyRow(
                g, m,
                max(e) if e else math.nan,
                statistics.median(e) if e else math.nan,
                len(e), missed.get((g, m), 0), excluded[g],
            ))
    return rows


def random_queries(seed: int, n: int) -> QueryArrays:
    """Random unit-vector endpoints with ``z0`` between their z-coordinates."""
    rng = np.random.Generator(np.random.PCG64(seed))
    x1 = rng.standard_normal((n, 3))
    x2 = rng.standard_normal((n, 3))
    x1 /= np.linalg.norm(x1, axis=1)[:, None]
    x2 /= np.linalg.norm(x2, axis=1)[:, None]
    lo = np.minimum(x1[:, 2], x2[:, 2])
    hi = np.maximum(x1[:, 2], x2[:, 2])
    return QueryArrays(x1, x2, lo + (hi - lo) * rng.random(n))


def host_metadata() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "machine": platform.machine(),
        "processor": platform.processor() or "unknown",
        "cpus": str(os.cpu_count()),
        "platform": platform.platform(),
        "fma_scalar": _fma.scalar_backend,
        "fma_array": _fma.array_backend,
    }


def bench_rows(qa: QueryArrays, methods: Sequence[str] = METHODS,
               lanes: Sequence[int] = (1,), threads: Sequence[int] = (1,),
               chunk: int = 4096, repeats: int = 1) -> List[BenchRow]:
    """Time kernel evaluation only; canonicalization happens beforehand.

    Each configuration is warmed up on a small slice, then timed ``repeats``
    times and the fastest run is kept.
    """
    with np.errstate(all="ignore"):
        cqa, _, _ = canonicalize_arrays(qa)
    n = len(cqa)
    warm = QueryArrays(cqa.x1[:64], cqa.x2[:64], cqa.z0[:64])
    rows = []
    for m in methods:
        for ln in lanes:
            for th in threads:
                if ln & (ln - 1) or ln > MAX_LANES:
                    rows.append(BenchRow(m, ln, th, n, math.nan, math.nan, "", "skipped"))
                    continue
                run_kernel(m, warm, ln, th, chunk)
                best = math.inf
                for _ in range(max(1, repeats)):
                    t0 = time.perf_counter()
                    res = run_kernel(m, cqa, ln, th, chunk)
                    best = min(best, time.perf_counter() - t0)
                rows.append(BenchRow(m, ln, th, n, best, n / best if best > 0 else math.inf,
                                     res.checksum()))
    return rows


def bench_ratios(rows: Sequence[BenchRow]) -> Dict[str, float]:
    """The informational ratios: scalar accux/naive, cdo/final, widest config."""
    t = {(r.method, r.lanes, r.threads): r.wall_seconds for r in rows if r.status == "ok"}
    out = {}
    if ("accux", 1, 1) in t and ("naive-final", 1, 1) in t:
        out["accux_over_naive_final_scalar"] = t[("accux", 1, 1)] / t[("naive-final", 1, 1)]
    if ("naive-cdo", 1, 1) in t and ("naive-final", 1, 1) in t:
        out["naive_cdo_over_naive_final_scalar"] = t[("naive-cdo", 1, 1)] / t[("naive-final", 1, 1)]
    wide = [k for k in t if k[0] == "accux" and ("naive-final", k[1], k[2]) in t]
    if wide:
        k = max(wide, key=lambda k: (k[1] * k[2], k[1]))
        out[f"accux_over_naive_final_lanes{k[1]}_threads{k[2]}"] = t[k] / t[("naive-final", k[1], k[2])]
    return out


def _trace_value(v):
    return v if isinstance(v, tuple) else float(v)


def intermediate_rows(records, method: str = "accux",
                      target_bits: int = 212) -> List[IntermediateRow]:
    """Mean relative error of each intermediate over the usable records.

    Queries are canonicalized first, so every intermediate is non-negative
    and the numerator involves no cancellation.
    """
    if method not in ("accux", "naive-final"):
        raise ValueError("intermediates are recorded for accux and naive-final only")
    tracer = accux_trace if method == "accux" else naive_final_trace
    sums = {k: 0.0 for k in INTERMEDIATES}
    count = 0
    for rec in records:
        try:
            cq, _ = canonicalize(rec.query)
            ref = reference_intermediates(cq, target_bits)
        except (DegenerateArc, DegenerateEquatorial, OracleError, ValueError):
            continue
        tr = tracer(cq)
        if "px" not in tr:
            continue
        count += 1
        for k in INTERMEDIATES:
            sums[k] += relative_error(_trace_value(tr[k]), ref[k])
    rows = []
    for k in INTERMEDIATES:
        mean = sums[k] / count if count else math.nan
        rows.append(IntermediateRow(k, mean, mean / U, count))
    return rows


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows(rows: Iterable, cls, schema: str, out: TextIO, fmt: str = "csv",
               comments: Optional[Dict[str, str]] = None) -> None:
    """CSV (schema comment, optional ``# key: value`` lines, header) or JSONL."""
    fields = list(cls.__dataclass_fields__)
    if fmt == "csv":
        out.write(f"# schema: {schema}\n")
        for k, v in (comments or {}).items():
            out.write(f"# {k}: {v}\n")
        out.write(",".join(fields) + "\n")
        for r in rows:
            d = asdict(r)
            out.write(",".join(_fmt(d[f]) for f in fields) + "\n")
    elif fmt == "jsonl":
        if comments:
            out.write(json.dumps({"schema": schema, "meta": comments}) + "\n")
        for r in rows:
            d = asdict(r)
            d = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}
            out.write(json.dumps({"schema": schema, **d}) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def print_progress(msg: str) -> None:
    print(msg, file=sys.stderr)
