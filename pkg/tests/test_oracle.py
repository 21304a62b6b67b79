import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from helpers import MERIDIAN, SQRT3_2, U, exact_cross, fr, intersecting_queries, random_queries
from xsect.expansion import Expansion, OracleError
from xsect.oracle import (
    ReferencePoint,
    apex_height,
    exact_normal,
    exact_s_squared,
    intersect_reference,
    intersect_reference_unit,
    oracle_classify,
    reference_intermediates,
    relative_error,
    relative_point_error,
)
from xsect.sphere import (
    ArcLatQuery,
    Classification,
    DegenerateArc,
    DegenerateEquatorial,
    Vec3,
    accux_error_bound,
    canonicalize,
    intersect,
)


def test_meridian_reference():
    ref = intersect_reference(MERIDIAN)
    assert ref.classification is Classification.TWO_POINTS
    px = ref.p1.px.fraction()
    assert abs(px * px - Fraction(3, 4)) <= Fraction(3, 4) / 2**210
    assert ref.p1.rounded == Vec3(SQRT3_2, 0.0, 0.5)
    assert ref.p2.rounded == Vec3(-SQRT3_2, 0.0, 0.5)


def test_meridian_tangent_at_pole():
    ref = intersect_reference(MERIDIAN._replace(z0=1.0))
    assert ref.classification is Classification.TANGENT
    assert ref.p1.rounded == (0.0, 0.0, 1.0)
    assert ref.p2 is None


def test_classification_and_degenerate():
    assert oracle_classify(MERIDIAN._replace(z0=1.0 + 2.0**-50)) is Classification.NO_INTERSECTION
    assert intersect_reference(MERIDIAN._replace(z0=1.5)).classification is Classification.NO_INTERSECTION
    with pytest.raises(DegenerateArc):
        intersect_reference(ArcLatQuery(Vec3(1.0, 0, 0), Vec3(2.0, 0, 0), 0.1))
    with pytest.raises(DegenerateEquatorial):
        intersect_reference(ArcLatQuery(Vec3(1.0, 0, 0), Vec3(0, 1.0, 0), 0.0))


@given(intersecting_queries())
def test_pre_sqrt_quantities_are_exact(q):
    n = exact_cross(q.x1, q.x2)
    assert tuple(c.fraction() for c in exact_normal(q.x1, q.x2)) == n
    nxy2 = n[0] ** 2 + n[1] ** 2
    assert exact_s_squared(q).fraction() == nxy2 - (nxy2 + n[2] ** 2) * fr(q.z0) ** 2


@settings(max_examples=60)
@given(intersecting_queries())
def test_accux_agrees_with_reference(q):
    ref = intersect_reference(q)
    sol = intersect(q, "accux")
    assert sol.classification is ref.classification
    bound = accux_error_bound(q.z0) * (1 + 10 * U)
    for p, r in zip(sol.points, ref.points):
        assert relative_point_error(p, r) <= bound


@settings(max_examples=40)
@given(intersecting_queries())
def test_unit_normal_path_agrees(q):
    a, b = intersect_reference(q), intersect_reference_unit(q)
    for p, r in zip(a.points, b.points):
        assert abs(float(p.px - r.px)) <= 2.0**-200
        assert abs(float(p.py - r.py)) <= 2.0**-200
        assert p.rounded == r.rounded


def test_424_bit_spot_check():
    rng = np.random.default_rng(424)
    for q in random_queries(rng, 100):
        lo, hi = intersect_reference(q, 212), intersect_reference(q, 416)
        assert lo.classification is hi.classification
        for p, r in zip(lo.points, hi.points):
            assert p.rounded == r.rounded
            assert abs(float(p.px - r.px)) <= 2.0**-205
            assert abs(float(p.py - r.py)) <= 2.0**-205


def test_endpoint_order_only_swaps_points():
    rng = np.random.default_rng(3)
    for q in random_queries(rng, 30):
        a = intersect_reference(q)
        b = intersect_reference(ArcLatQuery(q.x2, q.x1, q.z0))
        if a.classification is Classification.TWO_POINTS:
            assert a.p1.px == b.p2.px and a.p1.py == b.p2.py
            assert a.p2.px == b.p1.px and a.p2.py == b.p1.py


def test_relative_point_error_examples():
    ref = ReferencePoint(Expansion([0.5]), Expansion([0.25]), 0.8, Vec3(0.5, 0.25, 0.8))
    assert relative_point_error(ref.rounded, ref) == 0.0
    p = (0.5 + 3 * 2.0**-53, 0.25 + 4 * 2.0**-53, 0.8)
    assert relative_point_error(p, ref) == 5 * 2.0**-53


def test_relative_point_error_matches_definition():
    rng = np.random.default_rng(9)
    ref = intersect_reference(MERIDIAN).p1
    for _ in range(300):
        p = (SQRT3_2 + rng.normal() * 1e-15, rng.normal() * 1e-15, 0.5)
        got = relative_point_error(p, ref)
        q = (fr(p[0]) - ref.px.fraction()) ** 2 + (fr(p[1]) - ref.py.fraction()) ** 2
        up, down = math.nextafter(got, math.inf), math.nextafter(got, 0.0)
        assert fr(down) ** 2 <= q <= fr(up) ** 2


def test_relative_error_helper():
    assert relative_error(1.0, Expansion([1.0])) == 0.0
    assert relative_error((1.0, 2.0**-60), Expansion([1.0])) == 2.0**-60
    assert relative_error(0.0, Expansion()) == 0.0
    assert relative_error(1.0, Expansion()) == math.inf


def test_reference_intermediates_consistent():
    cq, _ = canonicalize(ArcLatQuery(Vec3(0.6, 0.0, 0.8), Vec3(0.0, 0.6, 0.8), 0.85))
    ref = reference_intermediates(cq)
    assert ref["s_sq"] == ref["norm_nxy_sq"] - ref["n_sq_z0_sq"]
    assert float(ref["px"]) == pytest.approx(float(ref["numerator"]) / float(ref["norm_nxy_sq"]))


def test_capacity_error_on_extreme_spread():
    q = ArcLatQuery(Vec3(0.5773502691896258, 0.5773502691896258, 0.5773502691896258),
                    Vec3(0.7071067811865475, 0.7071067811865475, 4.281997108460747e-89),
                    0.2886751345948129)
    with pytest.raises(OracleError):
        intersect_reference(q)


def test_apex_height():
    assert float(apex_height((1.0, 0, 0), (0, 0, 1.0))) == 1.0
    assert apex_height((1.0, 0, 0), (0, 1.0, 0)).is_zero()
    x1, x2 = (0.6, 0.0, 0.8), (0.0, 0.6, 0.8)
    n = exact_cross(x1, x2)
    a = apex_height(x1, x2).fraction()
    want = (n[0] ** 2 + n[1] ** 2) / sum(c * c for c in n)
    assert abs(a * a - want) <= want / 2**200
