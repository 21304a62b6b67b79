"""Exact-arithmetic helpers and input generators shared by the tests."""

import math
from fractions import Fraction

import numpy as np
from hypothesis import strategies as st

from xsect.sphere import ArcLatQuery, Vec3

U = 2.0**-53
U2 = Fraction(U) ** 2


def fr(x) -> Fraction:
    return Fraction(float(x))


def pair_value(p) -> Fraction:
    return fr(p[0]) + fr(p[1])


def rel(approx: Fraction, exact: Fraction) -> Fraction:
    return abs(approx - exact) / abs(exact)


def sqrt_rel_error(y: Fraction, v: Fraction) -> float:
    """``|y - sqrt(v)| / sqrt(v)`` from exact rationals, accurate to a few ulps."""
    e2 = (y * y - v) / v
    return abs(float(e2)) / (math.sqrt(1.0 + float(e2)) + 1.0)


def floats(min_exp: int = -500, max_exp: int = 500):
    """Finite binary64 values with exponents in range, plus signed zeros."""
    mant = st.integers(2**52, 2**53 - 1)
    nonzero = st.builds(
        lambda m, e, s: math.ldexp(s * m, e - 52),
        mant, st.integers(min_exp, max_exp), st.sampled_from([1, -1]),
    )
    return st.one_of(nonzero, st.sampled_from([0.0, -0.0, 1.0, -1.0]))


def unit_floats():
    # Components far below 2**-30 next to O(1) ones make exact products
    # spread over too many binades for a 16-component expansion.
    return st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False).map(
        lambda c: c if abs(c) >= 2.0**-30 else 0.0)


@st.composite
def unit_vectors(draw):
    v = draw(st.tuples(unit_floats(), unit_floats(), unit_floats()))
    n = math.sqrt(sum(c * c for c in v))
    if n < 0.1:
        v = (v[0] + 0.5, v[1] + 0.5, v[2] + 0.5)
        n = math.sqrt(sum(c * c for c in v))
    return Vec3(*(c / n if abs(c / n) >= 2.0**-30 else 0.0 for c in v))


@st.composite
def intersecting_queries(draw):
    """Non-degenerate arcs with z0 strictly between the endpoint heights."""
    x1 = draw(unit_vectors())
    x2 = draw(unit_vectors())
    t = draw(st.floats(0.01, 0.99))
    lo, hi = sorted((x1.z, x2.z))
    n = np.cross(x1, x2)
    from hypothesis import assume

    assume(np.linalg.norm(n) > 1e-3 and math.hypot(n[0], n[1]) > 1e-3 and hi - lo > 1e-6)
    return ArcLatQuery(x1, x2, lo + (hi - lo) * t)


def random_units(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


def random_queries(rng: np.random.Generator, n: int):
    x1, x2 = random_units(rng, n), random_units(rng, n)
    out = []
    for a, b, t in zip(x1.tolist(), x2.tolist(), rng.random(n).tolist()):
        lo, hi = sorted((a[2], b[2]))
        out.append(ArcLatQuery(Vec3(*a), Vec3(*b), lo + (hi - lo) * t))
    return out


def exact_cross(x1, x2):
    a, b = [fr(c) for c in x1], [fr(c) for c in x2]
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


MERIDIAN = ArcLatQuery(Vec3(1.0, 0.0, 0.0), Vec3(0.0, 0.0, 1.0), 0.5)
SQRT3_2 = float.fromhex("0x1.bb67ae8584caap-1")
