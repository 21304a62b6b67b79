"""Reference intersection points in expansion arithmetic.

The polynomial part of the formula (normal, squared norms, the radicand and
the numerators) is evaluated exactly; the square root and the division by
``|n_xy|**2`` are carried to ``target_bits`` bits.  No canonicalization is
needed because nothing is rounded: the formula is evaluated directly in the
caller's frame, which also fixes the order of the two points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

from .eft import two_prod
from .expansion import Expansion, OracleError, exp_div, exp_sqrt
from .sphere import (
    ArcLatQuery,
    Classification,
    DegenerateArc,
    DegenerateEquatorial,
    Vec3,
)

__all__ = [
    "OracleError",
    "ReferencePoint",
    "ReferenceSolution",
    "exact_normal",
    "exact_s_squared",
    "oracle_classify",
    "intersect_reference",
    "intersect_reference_unit",
    "reference_intermediates",
    "relative_point_error",
    "relative_error",
    "apex_height",
]

DEFAULT_BITS = 212


@dataclass(frozen=True)
class ReferencePoint:
    px: Expansion
    py: Expansion
    pz: float
    rounded: Vec3


@dataclass(frozen=True)
class ReferenceSolution:
    classification: Classification
    p1: Optional[ReferencePoint] = None
    p2: Optional[ReferencePoint] = None

    @property
    def points(self):
        return tuple(p for p in (self.p1, self.p2) if p is not None)


def _dop(a: float, b: float, c: float, d: float) -> Expansion:
    # a*d - b*c exactly: two exact products, four components at most.
    p1, r1 = two_prod(a, d)
    p2, r2 = two_prod(b, c)
    return Expansion((p1, r1, -p2, -r2))


def exact_normal(x1: Sequence[float], x2: Sequence[float]) -> Tuple[Expansion, Expansion, Expansion]:
    """``x1 x x2`` with every component exact."""
    (x1x, x1y, x1z), (x2x, x2y, x2z) = x1, x2
    return (
        _dop(x1y, x1z, x2y, x2z),
        _dop(x1z, x1x, x2z, x2x),
        _dop(x1x, x1y, x2x, x2y),
    )


def _squares(n):
    nx, ny, nz = n
    nxy2 = nx * nx + ny * ny
    return nxy2, nxy2 + nz * nz


def exact_s_squared(q: ArcLatQuery) -> Expansion:
    """``|n_xy|**2 - |n|**2 z0**2`` evaluated exactly."""
    nxy2, n2 = _squares(exact_normal(q.x1, q.x2))
    return nxy2 - n2 * q.z0 * q.z0


def _check_degenerate(n, nxy2):
    if all(c.is_zero() for c in n):
        raise DegenerateArc("endpoints are parallel")
    if nxy2.is_zero():
        raise DegenerateEquatorial("arc lies in the equator plane")


def oracle_classify(q: ArcLatQuery) -> Classification:
    """Exact classification from the sign of the radicand."""
    n = exact_normal(q.x1, q.x2)
    nxy2, n2 = _squares(n)
    _check_degenerate(n, nxy2)
    sgn = (nxy2 - n2 * q.z0 * q.z0).sign()
    if sgn < 0:
        return Classification.NO_INTERSECTION
    return Classification.TANGENT if sgn == 0 else Classification.TWO_POINTS


def _point(px: Expansion, py: Expansion, z0: float) -> ReferencePoint:
    return ReferencePoint(px, py, z0, Vec3(float(px), float(py), z0))


def intersect_reference(q: ArcLatQuery, target_bits: int = DEFAULT_BITS) -> ReferenceSolution:
    """Both intersection points with about ``target_bits`` correct bits.

    ``p1`` belongs to the ``+s`` branch, matching the library's ordering.
    Raises :class:`DegenerateArc` / :class:`DegenerateEquatorial`.
    """
    z0 = q.z0
    n = exact_normal(q.x1, q.x2)
    nx, ny, nz = n
    nxy2, n2 = _squares(n)
    _check_degenerate(n, nxy2)
    s2 = nxy2 - n2 * z0 * z0
    if s2.sign() < 0:
        return ReferenceSolution(Classification.NO_INTERSECTION)
    # A little headroom so the quotient still carries target_bits.
    bits = min(target_bits + 8, 424)
    s = exp_sqrt(s2, bits)
    a = nx * nz * z0
    b = ny * nz * z0
    sy, sx = s * ny, s * nx
    p1 = _point(-exp_div(a + sy, nxy2, bits), -exp_div(b - sx, nxy2, bits), z0)
    if s.is_zero():
        return ReferenceSolution(Classification.TANGENT, p1)
    p2 = _point(-exp_div(a - sy, nxy2, bits), -exp_div(b + sx, nxy2, bits), z0)
    return ReferenceSolution(Classification.TWO_POINTS, p1, p2)


def intersect_reference_unit(q: ArcLatQuery, target_bits: int = DEFAULT_BITS) -> ReferenceSolution:
    """Second reference path through the unit normal ``n / |n|``.

    Used only to confirm that the two algebraic forms agree; the unit normal
    is irrational in general, so this path is accurate to about
    ``target_bits`` rather than exact before the square root.
    """
    z0 = q.z0
    n = exact_normal(q.x1, q.x2)
    nxy2, n2 = _squares(n)
    _check_degenerate(n, nxy2)
    bits = min(target_bits + 16, 424)
    norm = exp_sqrt(n2, bits)
    hx, hy, hz = (exp_div(c, norm, bits) for c in n)
    t2 = hx * hx + hy * hy
    s2 = t2 - Expansion((z0,)) * z0
    if s2.sign() < 0:
        return ReferenceSolution(Classification.NO_INTERSECTION)
    s = exp_sqrt(s2, bits)
    a = hx * hz * z0
    b = hy * hz * z0
    sy, sx = s * hy, s * hx
    p1 = _point(-exp_div(a + sy, t2, bits), -exp_div(b - sx, t2, bits), z0)
    p2 = _point(-exp_div(a - sy, t2, bits), -exp_div(b + sx, t2, bits), z0)
    return ReferenceSolution(Classification.TWO_POINTS, p1, p2)


def relative_point_error(computed: Sequence[float], ref: ReferencePoint) -> float:
    """``|computed - P|`` (the relative error, since ``|P| = 1``), rounded once.

    The difference and its squared norm are exact; only the square root is
    approximated, to 106 bits, before the final rounding.
    """
    dx = Expansion((computed[0],)) - ref.px
    dy = Expansion((computed[1],)) - ref.py
    sq = dx * dx + dy * dy
    return float(exp_sqrt(sq, 106))


def relative_error(computed, exact: Expansion) -> float:
    """``|computed - exact| / |exact|`` for a float or a ``(hi, lo)`` pair."""
    if isinstance(computed, tuple):
        c = Expansion(computed)
    else:
        c = Expansion((computed,))
    if exact.is_zero():
        return 0.0 if c.is_zero() else math.inf
    return abs(float(exp_div(c - exact, exact, 60)))


def reference_intermediates(q: ArcLatQuery, target_bits: int = DEFAULT_BITS) -> Dict[str, Expansion]:
    """Reference values of the quantities recorded by ``accux_trace``.

    ``q`` must be canonical.  Keys: ``nx``, ``ny``, ``nz``, ``norm_n_sq``,
    ``norm_nxy_sq``, ``z0_sq``, ``n_sq_z0_sq``, ``s_sq``, ``s``, ``nx_nz``,
    ``numerator`` (``z0 nx nz + s ny``) and ``px`` (numerator over
    ``|n_xy|**2``).
    """
    z0 = q.z0
    n = exact_normal(q.x1, q.x2)
    nx, ny, nz = n
    nxy2, n2 = _squares(n)
    _check_degenerate(n, nxy2)
    zz = Expansion((z0,)) * z0
    nzz = n2 * zz
    s2 = nxy2 - nzz
    if s2.sign() < 0:
        raise OracleError("query has no intersection")
    s = exp_sqrt(s2, target_bits)
    nxnz = nx * nz
    num = nxnz * z0 + s * ny
    return {
        "nx": nx,
        "ny": ny,
        "nz": nz,
        "norm_n_sq": n2,
        "norm_nxy_sq": nxy2,
        "z0_sq": zz,
        "n_sq_z0_sq": nzz,
        "s_sq": s2,
        "s": s,
        "nx_nz": nxnz,
        "numerator": num,
        "numerator_rounded": num,
        "denominator_rounded": nxy2,
        "px": exp_div(num, nxy2, target_bits),
    }


def apex_height(x1: Sequence[float], x2: Sequence[float], target_bits: int = DEFAULT_BITS) -> Expansion:
    """``sqrt(|n_xy|**2 / |n|**2)``: the largest ``|z|`` on the great circle."""
    n = exact_normal(x1, x2)
    nxy2, n2 = _squares(n)
    if n2.is_zero():
        raise DegenerateArc("endpoints are parallel")
    return exp_sqrt(exp_div(nxy2, n2, target_bits + 8), target_bits)
