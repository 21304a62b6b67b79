import math

import pytest

from xsect.dataset import (
    DEFAULT_DECADES,
    DEFAULT_SCHEDULE,
    ILLCOND_MAX_LAT,
    BandSpec,
    RecordParseError,
    band_label,
    gen_illcond,
    gen_primary,
    lat_lon_to_xyz,
    read_records,
    write_records,
)
from xsect.oracle import exact_normal, exact_s_squared, oracle_classify
from xsect.sphere import Classification


def _lat(v):
    return math.degrees(math.asin(max(-1.0, min(1.0, v.z))))


def test_schedule_shape():
    assert DEFAULT_SCHEDULE[0] == BandSpec(0.0, 1e-4)
    assert DEFAULT_SCHEDULE[-1] == BandSpec(89.99, 89.999)
    assert len(DEFAULT_SCHEDULE) == 17
    for a, b in zip(DEFAULT_SCHEDULE, DEFAULT_SCHEDULE[1:]):
        assert a.lat_hi == b.lat_lo
    assert DEFAULT_DECADES[0] == (-15, -14) and DEFAULT_DECADES[-1] == (-3, -2)


def test_lat_lon_to_xyz():
    assert lat_lon_to_xyz(0.0, 0.0) == (1.0, 0.0, 0.0)
    v = lat_lon_to_xyz(30.0, 45.0)
    assert math.fsum(c * c for c in v) == pytest.approx(1.0, abs=4e-16)


def test_primary_deterministic_and_seed_dependent():
    a = gen_primary(42, per_band=5)
    assert a == gen_primary(42, per_band=5)
    assert a != gen_primary(43, per_band=5)
    assert [r.id for r in a] == list(range(len(a)))


def test_primary_band_prefix_is_stable():
    # Each band has its own stream, so a larger per_band extends every band.
    small, big = gen_primary(9, per_band=3), gen_primary(9, per_band=6)
    for i in range(len(DEFAULT_SCHEDULE)):
        assert small[3 * i:3 * i + 3] == [r._replace(id=r.id - 3 * i) for r in big[6 * i:6 * i + 3]]


def test_zero_counts():
    assert gen_primary(1, per_band=0) == []
    assert gen_illcond(1, per_decade=0) == []
    with pytest.raises(ValueError):
        gen_primary(1, per_band=-1)
    with pytest.raises(ValueError):
        gen_primary(1, schedule=[BandSpec(10.0, 5.0)])
    with pytest.raises(ValueError):
        gen_illcond(1, decades=[(-20, -19)])


def test_primary_band_containment():
    recs = gen_primary(11, per_band=20)
    bands = {band_label(b): b for b in DEFAULT_SCHEDULE}
    for r in recs:
        lo, hi = bands[r.band]
        for v in (r.query.x1, r.query.x2):
            lat = _lat(v)
            assert lo - 1e-9 <= lat <= hi + 1e-9
        za, zb = sorted((r.query.x1.z, r.query.x2.z))
        assert za <= r.query.z0 <= zb


@pytest.mark.slow
def test_primary_mostly_intersecting():
    recs = gen_primary(42, per_band=589)[:10_000]
    hits = 0
    for r in recs:
        try:
            hits += oracle_classify(r.query) is not Classification.NO_INTERSECTION
        except ValueError:
            pass
    assert hits >= 0.99 * len(recs)


def test_illcond_properties():
    recs = gen_illcond(5, per_decade=20)
    assert len(recs) == 20 * len(DEFAULT_DECADES)
    assert recs == gen_illcond(5, per_decade=20)
    for r in recs:
        q = r.query
        lo = int(r.band.split("..")[0][2:])
        s2 = exact_s_squared(q)
        assert s2.sign() >= 0
        n2 = math.fsum(float(c) ** 2 for c in exact_normal(q.x1, q.x2))
        s = math.sqrt(float(s2))
        assert s <= 10.0 ** (lo / 2 + 1) * math.sqrt(n2)
        assert q.z0 > 0
        for v in (q.x1, q.x2):
            assert 0 < _lat(v) <= ILLCOND_MAX_LAT * (1 + 1e-12)


def test_illcond_gives_up():
    with pytest.raises(RuntimeError):
        gen_illcond(1, decades=[(-3, -2)], per_decade=10_000, max_draws=4096)


@pytest.mark.parametrize("fmt,name", [("jsonl", "d.jsonl"), ("txt", "d.txt")])
def test_round_trip(tmp_path, fmt, name):
    recs = gen_primary(2, per_band=3) + gen_illcond(2, per_decade=2)
    recs = [r._replace(id=i) for i, r in enumerate(recs)]
    p = tmp_path / name
    write_records(recs, p, fmt)
    back = read_records(p)
    assert [r.query for r in back] == [r.query for r in recs]
    assert [r.id for r in back] == [r.id for r in recs]
    if fmt == "jsonl":
        assert back == recs


def test_empty_and_comment_only_files(tmp_path):
    p = tmp_path / "e.txt"
    p.write_text("")
    assert read_records(p) == []
    p.write_text("# nothing here\n\n")
    assert read_records(p) == []


def test_hand_written_text_record(tmp_path):
    p = tmp_path / "h.txt"
    p.write_text("# meridian\n0x1p+0 0x0p+0 0x0p+0 -0x1p+0 0x0p+0 0x0p+0 0x1p-1\n")
    (r,) = read_records(p)
    assert r.query.x2.x == -1.0 and r.query.z0 == 0.5 and r.id == 0


@pytest.mark.parametrize("line,field", [
    ("0x1p+0 0x0p+0 0x0p+0 -0x1p+0 0x0p+0 zz 0x1p-1", "x2[2]"),
    ("0x1p+0 0x0p+0", "<columns>"),
    ('{"x1": ["0x1p+0", "0x0p+0"], "x2": ["0x0p+0", "0x1p+0", "0x0p+0"], "z0": "0x0p+0"}', "x1"),
    ('{"x1": ["0x1p+0", "0x0p+0", "0x0p+0"], "x2": ["0x0p+0", "0x1p+0", "0x0p+0"]}', "z0"),
    ('{"x1": ["0x1p+0", "0x0p+0", "0x0p+0"], "x2": ["0x0p+0", "inf", "0x0p+0"], "z0": "0x0p+0"}', "x2[1]"),
    ("{not json", "<json>"),
])
def test_parse_error_reports_line_and_field(tmp_path, line, field):
    p = tmp_path / "bad.txt"
    p.write_text("# header\n\n" + line + "\n")
    with pytest.raises(RecordParseError) as ei:
        read_records(p)
    assert ei.value.line == 3 and ei.value.field == field
