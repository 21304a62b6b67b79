"""Seeded query datasets and their hex-float file format.

Random numbers come from numpy's PCG64.  A dataset's seed feeds one
``SeedSequence``; ``spawn`` gives every band (or decade) its own child
stream, so each group is reproducible on its own and the groups can be
generated in any order.  Angles are converted with the ``math`` module one
element at a time so results do not depend on numpy's vectorized trig.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .expansion import Expansion
from .oracle import apex_height, exact_s_squared
from .sphere import ArcLatQuery, Vec3

log = logging.getLogger(__name__)

__all__ = [
    "BandSpec",
    "QueryRecord",
    "DEFAULT_SCHEDULE",
    "DEFAULT_DECADES",
    "ILLCOND_MAX_LAT",
    "RecordParseError",
    "lat_lon_to_xyz",
    "gen_primary",
    "gen_illcond",
    "write_records",
    "read_records",
    "band_label",
    "decade_label",
]


class BandSpec(NamedTuple):
    lat_lo: float
    lat_hi: float


class QueryRecord(NamedTuple):
    id: int
    query: ArcLatQuery
    band: str


def _default_schedule() -> Tuple[BandSpec, ...]:
    edges = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0]
    edges += [float(d) for d in range(11, 82, 10)]
    edges += [89.0, 89.9, 89.99, 89.999]
    return tuple(BandSpec(a, b) for a, b in zip(edges, edges[1:]))


#: Narrow bands near the equator and pole, 10-degree bands in between.
DEFAULT_SCHEDULE = _default_schedule()
#: One decade of offsets per exponent, 1e-15 up to 1e-2.
DEFAULT_DECADES = tuple((e, e + 1) for e in range(-15, -2))
#: Endpoint latitude limit (degrees) for the ill-conditioned set.
ILLCOND_MAX_LAT = 1e-4


def band_label(b: BandSpec) -> str:
    return f"{b.lat_lo:g}-{b.lat_hi:g}"


def decade_label(d: Tuple[int, int]) -> str:
    return f"1e{d[0]}..1e{d[1]}"


def lat_lon_to_xyz(lat: float, lon: float) -> Vec3:
    """Degrees to a (nearly) unit vector in binary64."""
    phi, lam = math.radians(lat), math.radians(lon)
    c = math.cos(phi)
    return Vec3(c * math.cos(lam), c * math.sin(lam), math.sin(phi))


def _streams(seed: int, k: int) -> List[np.random.Generator]:
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(k)]


def gen_primary(seed: int, schedule: Sequence[BandSpec] = DEFAULT_SCHEDULE,
                per_band: int = 1000) -> List[QueryRecord]:
    """Arc endpoints with latitudes uniform in each band, longitudes uniform
    in [0, 360), and ``z0`` uniform between the endpoints' z-coordinates.

    Endpoints are in the northern hemisphere.  Each band draws five uniforms
    per record from its own stream: lat1, lon1, lat2, lon2 and the ``z0``
    fraction.
    """
    for b in schedule:
        if not 0 <= b.lat_lo < b.lat_hi <= 90:
            raise ValueError(f"invalid band {b}")
    if per_band < 0:
        raise ValueError("per_band must be non-negative")
    records: List[QueryRecord] = []
    if per_band == 0:
        log.warning("per_band is 0; every band is empty")
        return records
    for band, rng in zip(schedule, _streams(seed, len(schedule))):
        lo, hi = band
        label = band_label(band)
        for u in rng.random((per_band, 5)).tolist():
            x1 = lat_lon_to_xyz(lo + (hi - lo) * u[0], 360.0 * u[1])
            x2 = lat_lon_to_xyz(lo + (hi - lo) * u[2], 360.0 * u[3])
            za, zb = sorted((x1.z, x2.z))
            z0 = za + (zb - za) * u[4]
            records.append(QueryRecord(len(records), ArcLatQuery(x1, x2, z0), label))
    return records


def _float_apex(x1: Vec3, x2: Vec3) -> float:
    nx = x1.y * x2.z - x1.z * x2.y
    ny = x1.z * x2.x - x1.x * x2.z
    nz = x1.x * x2.y - x1.y * x2.x
    nxy2 = nx * nx + ny * ny
    return math.sqrt(nxy2 / (nxy2 + nz * nz))


def gen_illcond(seed: int, decades: Sequence[Tuple[int, int]] = DEFAULT_DECADES,
                per_decade: int = 500, max_draws: int = 20_000_000) -> List[QueryRecord]:
    """Shallow arcs near the equator sliced just below their apex.

    Endpoint latitudes lie in (0, 1e-4] degrees and ``z0 = apex - r`` with
    ``r`` uniform in ``[10**lo, 10**hi)``; ``z0`` is formed from the exact
    apex height and rounded once.  Candidates whose apex is not above ``r``
    (the circle would miss the arc) are rejected and redrawn, which samples
    the conditional distribution; at the larger offsets this keeps mostly
    nearly-antipodal or nearly-coincident endpoint pairs.
    """
    for lo, hi in decades:
        if not -15 <= lo < hi <= -2:
            raise ValueError(f"decade {(lo, hi)} outside [-15, -2]")
    if per_decade < 0:
        raise ValueError("per_decade must be non-negative")
    records: List[QueryRecord] = []
    if per_decade == 0:
        return records
    batch = 4096
    for dec, rng in zip(decades, _streams(seed, len(decades))):
        r_lo, r_hi = 10.0 ** dec[0], 10.0 ** dec[1]
        label = decade_label(dec)
        kept = draws = 0
        while kept < per_decade:
            if draws >= max_draws:
                raise RuntimeError(f"decade {label}: too many rejected draws")
            draws += batch
            for u in rng.random((batch, 5)).tolist():
                r = r_lo + (r_hi - r_lo) * u[4]
                x1 = lat_lon_to_xyz(ILLCOND_MAX_LAT * (1.0 - u[0]), 360.0 * u[1])
                x2 = lat_lon_to_xyz(ILLCOND_MAX_LAT * (1.0 - u[2]), 360.0 * u[3])
                if not _float_apex(x1, x2) > r * (1 + 1e-9):
                    continue
                z0 = float(apex_height(x1, x2) - Expansion((r,)))
                q = ArcLatQuery(x1, x2, z0)
                if z0 <= 0 or exact_s_squared(q).sign() < 0:
                    continue
                records.append(QueryRecord(len(records), q, label))
                kept += 1
                if kept == per_decade:
                    break
    return records


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


class RecordParseError(ValueError):
    def __init__(self, line: int, field: str, msg: str):
        super().__init__(f"line {line}: field {field}: {msg}")
        self.line = line
        self.field = field


def _record_json(rec: QueryRecord) -> str:
    q = rec.query
    return json.dumps({
        "id": rec.id,
        "band": rec.band,
        "x1": [float(v).hex() for v in q.x1],
        "x2": [float(v).hex() for v in q.x2],
        "z0": float(q.z0).hex(),
    })


def _record_text(rec: QueryRecord) -> str:
    q = rec.query
    return " ".join(float(v).hex() for v in (*q.x1, *q.x2, q.z0))


def write_records(records: Iterable[QueryRecord], path, fmt: str = "jsonl") -> None:
    """Write one record per line: ``jsonl`` or ``txt`` (7 hex columns)."""
    if fmt not in ("jsonl", "txt"):
        raise ValueError(f"unknown record format {fmt!r}")
    line = _record_json if fmt == "jsonl" else _record_text
    with open(path, "w", encoding="ascii", newline="\n") as f:
        for rec in records:
            f.write(line(rec) + "\n")


def _hex(s, lineno: int, field: str) -> float:
    if not isinstance(s, str):
        raise RecordParseError(lineno, field, f"expected a hex string, got {s!r}")
    try:
        v = float.fromhex(s)
    except ValueError:
        raise RecordParseError(lineno, field, f"bad hex float {s!r}") from None
    if not math.isfinite(v):
        raise RecordParseError(lineno, field, "value is not finite")
    return v


def _vec(v, lineno: int, field: str) -> Vec3:
    if not isinstance(v, list) or len(v) != 3:
        raise RecordParseError(lineno, field, "expected a list of 3 hex floats")
    return Vec3(*(_hex(c, lineno, f"{field}[{i}]") for i, c in enumerate(v)))


def _parse_json(text: str, lineno: int) -> QueryRecord:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RecordParseError(lineno, "<json>", str(exc)) from None
    if not isinstance(obj, dict):
        raise RecordParseError(lineno, "<json>", "expected an object")
    for key in ("x1", "x2", "z0"):
        if key not in obj:
            raise RecordParseError(lineno, key, "missing")
    rid = obj.get("id", lineno - 1)
    if not isinstance(rid, int):
        raise RecordParseError(lineno, "id", f"expected an integer, got {rid!r}")
    q = ArcLatQuery(_vec(obj["x1"], lineno, "x1"), _vec(obj["x2"], lineno, "x2"),
                    _hex(obj["z0"], lineno, "z0"))
    return QueryRecord(rid, q, str(obj.get("band", "")))


_TEXT_FIELDS = ("x1[0]", "x1[1]", "x1[2]", "x2[0]", "x2[1]", "x2[2]", "z0")


def _parse_text(text: str, lineno: int, rid: int) -> QueryRecord:
    cols = text.split()
    if len(cols) != 7:
        raise RecordParseError(lineno, "<columns>", f"expected 7 columns, got {len(cols)}")
    v = [_hex(c, lineno, f) for c, f in zip(cols, _TEXT_FIELDS)]
    return QueryRecord(rid, ArcLatQuery(Vec3(*v[:3]), Vec3(*v[3:6]), v[6]), "")


def read_records(path) -> List[QueryRecord]:
    """Read either format; blank lines and ``#`` comments are skipped."""
    records: List[QueryRecord] = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if text.startswith("{"):
                records.append(_parse_json(text, lineno))
            else:
                records.append(_parse_text(text, lineno, len(records)))
    return records
