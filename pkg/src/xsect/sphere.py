"""Intersections of great-circle arcs with circles of constant latitude.

Given arc endpoints ``x1``, ``x2`` and the plane ``z = z0``, the intersection
points are, with ``n = x1 x x2`` and ``s = sqrt(|n_xy|**2 - |n|**2 z0**2)``::

    P = ( -(z0 nx nz +- s ny) / |n_xy|**2,
          -(z0 ny nz -+ s nx) / |n_xy|**2,
          z0 )

Four evaluators are provided:

``naive-final``
    the formula above in plain binary64 (normal via Kahan's determinant);
``naive-cdo``
    the same with the unit normal ``n/|n|`` (the form used by YAC/CDO);
``naive-baseline``
    the unit-normal form with ``1 - nz_hat**2`` as denominator, which cancels
    catastrophically near the equator;
``accux``
    the error-free-transformation evaluation, accurate to about
    ``3 sqrt(1 - z0**2) u``.

All kernels work on the canonical frame in which the three normal components
and ``z0`` are non-negative; :func:`intersect` handles the reflections.  Each
kernel is written once and runs on Python floats or on float64 arrays
(``lanes > 1``), producing bit-identical results either way.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .eft import (
    U,
    acc_sqrt,
    accu_dop,
    comp_dot,
    comp_dot_c,
    fast_two_sum,
    kahan_dop,
    sum_of_squares_c,
    two_prod,
    two_sum,
)

__all__ = [
    "Vec3",
    "ArcLatQuery",
    "NormalTriple",
    "SignTransform",
    "Classification",
    "IntersectionSolution",
    "DegenerateArc",
    "DegenerateEquatorial",
    "METHODS",
    "cross_accurate",
    "canonicalize",
    "apply_inverse",
    "classify",
    "accux",
    "accux_trace",
    "intersect_naive_final",
    "intersect_naive_cdo",
    "intersect_naive_baseline",
    "intersect",
    "validate_query",
    "QueryArrays",
    "BatchResult",
    "canonicalize_arrays",
    "run_kernel",
    "intersect_batch",
    "accux_batch",
    "point_on_arc",
    "naive_error_bound",
    "accux_error_bound",
]


class Vec3(NamedTuple):
    x: float
    y: float
    z: float


class ArcLatQuery(NamedTuple):
    x1: Vec3
    x2: Vec3
    z0: float


Pair = Tuple[float, float]


class NormalTriple(NamedTuple):
    """Cross product ``x1 x x2`` with each component as a compensated pair."""

    nx: Pair
    ny: Pair
    nz: Pair


class Classification(enum.Enum):
    NO_INTERSECTION = "NoIntersection"
    TANGENT = "Tangent"
    TWO_POINTS = "TwoPoints"

    def __str__(self):
        return self.value


class DegenerateArc(ValueError):
    """The endpoints are parallel, so they do not define a great circle."""


class DegenerateEquatorial(ValueError):
    """The arc lies in the equator plane; the intersection set is empty or infinite."""


@dataclass(frozen=True)
class IntersectionSolution:
    classification: Classification
    p1: Optional[Vec3] = None
    p2: Optional[Vec3] = None

    @property
    def points(self):
        return tuple(p for p in (self.p1, self.p2) if p is not None)


# Kernel result codes; arrays carry one per lane.
NONE, TANGENT, TWO, DEG_ARC, DEG_EQUATORIAL = 0, 1, 2, 3, 4
_CODE_CLASS = {
    NONE: Classification.NO_INTERSECTION,
    TANGENT: Classification.TANGENT,
    TWO: Classification.TWO_POINTS,
}


# ---------------------------------------------------------------------------
# Sign canonicalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignTransform:
    """Endpoint swap plus reflections across the coordinate planes.

    Swapping endpoints negates ``n``; reflecting ``x`` flips the signs of
    ``ny`` and ``nz`` (likewise for ``y``); reflecting ``z`` flips ``nx``,
    ``ny`` and ``z0``.  Every element is its own inverse and only flips signs,
    so applying it never rounds.
    """

    swap_endpoints: bool = False
    reflect_x: bool = False
    reflect_y: bool = False
    reflect_z: bool = False

    @property
    def exchanges_points(self) -> bool:
        """Whether the first/second intersection point swap roles under the map."""
        return self.swap_endpoints != self.reflect_z

    def apply(self, p: Vec3) -> Vec3:
        return Vec3(
            -p[0] if self.reflect_x else p[0],
            -p[1] if self.reflect_y else p[1],
            -p[2] if self.reflect_z else p[2],
        )

    def apply_query(self, q: ArcLatQuery) -> ArcLatQuery:
        a, b = self.apply(q.x1), self.apply(q.x2)
        if self.swap_endpoints:
            a, b = b, a
        return ArcLatQuery(a, b, -q.z0 if self.reflect_z else q.z0)


def apply_inverse(t: SignTransform, p: Vec3) -> Vec3:
    """Map a point from the canonical frame back to the caller's frame."""
    return t.apply(p)


def transform_for_signs(neg_x: bool, neg_y: bool, neg_z: bool, neg_z0: bool) -> SignTransform:
    """The unique transform that makes the given normal/z0 signs non-negative."""
    rz = bool(neg_z0)
    fx, fy, fz = bool(neg_x) ^ rz, bool(neg_y) ^ rz, bool(neg_z)
    swap = fx ^ fy ^ fz
    return SignTransform(swap, fy ^ swap, fx ^ swap, rz)


def _pair_negative(p: Pair) -> bool:
    hi, lo = p
    return hi < 0 or (hi == 0 and lo < 0)


def cross_accurate(x1: Sequence[float], x2: Sequence[float]) -> NormalTriple:
    """``x1 x x2`` with every component from :func:`accu_dop`."""
    n = NormalTriple(*_accurate_normal(x1, x2))
    if all(hi == 0 and lo == 0 for hi, lo in n):
        raise DegenerateArc("endpoints are parallel")
    return n


def _accurate_normal(x1, x2):
    (x1x, x1y, x1z), (x2x, x2y, x2z) = x1, x2
    return (
        accu_dop(x1y, x1z, x2y, x2z),
        accu_dop(x1z, x1x, x2z, x2x),
        accu_dop(x1x, x1y, x2x, x2y),
    )


def canonicalize(q: ArcLatQuery) -> Tuple[ArcLatQuery, SignTransform]:
    """Reflect/swap ``q`` so that ``n >= 0`` componentwise and ``z0 >= 0``.

    Signs come from the compensated normal, whose sign is always the exact
    sign of the true component.
    """
    n = cross_accurate(q.x1, q.x2)
    t = transform_for_signs(*(_pair_negative(c) for c in n), q.z0 < 0)
    return t.apply_query(q), t


def validate_query(q: ArcLatQuery) -> None:
    """Reject non-finite input and endpoints too far from the unit sphere."""
    vals = (*q.x1, *q.x2, q.z0)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError("query contains non-finite values")
    for name, v in (("x1", q.x1), ("x2", q.x2)):
        norm = math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
        if not 0.5 <= norm <= 2.0:
            raise ValueError(f"|{name}| = {norm!r} is outside [0.5, 2]")


# ---------------------------------------------------------------------------
# Kernels.  Each takes x1, x2 as 3-sequences and z0, either all floats or all
# arrays, and returns (code, p1x, p1y, p2x, p2y).
# ---------------------------------------------------------------------------


def _is_array(x) -> bool:
    return isinstance(x, np.ndarray)


def _codes(arc_zero, eq_zero, radicand):
    """Classification code(s) from degeneracy flags and the signed radicand."""
    if _is_array(radicand):
        return np.select(
            [arc_zero, eq_zero, radicand < 0, radicand == 0],
            [DEG_ARC, DEG_EQUATORIAL, NONE, TANGENT],
            TWO,
        ).astype(np.int8)
    if arc_zero:
        return DEG_ARC
    if eq_zero:
        return DEG_EQUATORIAL
    if radicand < 0:
        return NONE
    return TANGENT if radicand == 0 else TWO


def _root(radicand):
    # Lanes without an intersection get a harmless zero; they are masked later.
    if _is_array(radicand):
        return np.sqrt(np.where(radicand < 0, 0.0, radicand))
    return math.sqrt(radicand)


def _has_points(code) -> bool:
    return _is_array(code) or code in (TANGENT, TWO)


def _naive_normal(x1, x2):
    (x1x, x1y, x1z), (x2x, x2y, x2z) = x1, x2
    return (
        kahan_dop(x1y, x1z, x2y, x2z),
        kahan_dop(x1z, x1x, x2z, x2x),
        kahan_dop(x1x, x1y, x2x, x2y),
    )


def _naive_final_kernel(x1, x2, z0, trace=None):
    nx, ny, nz = _naive_normal(x1, x2)
    nxy2 = nx * nx + ny * ny
    n2 = nxy2 + nz * nz
    zz = z0 * z0
    nz0 = n2 * zz
    s2 = nxy2 - nz0
    code = _codes((nx == 0) & (ny == 0) & (nz == 0), nxy2 == 0, s2)
    if trace is not None:
        trace.update(nx=nx, ny=ny, nz=nz, norm_n_sq=n2, norm_nxy_sq=nxy2, z0_sq=zz,
                     n_sq_z0_sq=nz0, s_sq=s2)
    if not _has_points(code):
        return code, None, None, None, None
    s = _root(s2)
    a = z0 * nx * nz
    b = z0 * ny * nz
    sy, sx = s * ny, s * nx
    if trace is not None:
        trace.update(s=s, nx_nz=nx * nz, numerator=a + sy, numerator_rounded=a + sy,
                     denominator_rounded=nxy2, px=(a + sy) / nxy2)
    return code, -((a + sy) / nxy2), -((b - sx) / nxy2), -((a - sy) / nxy2), -((b + sx) / nxy2)


def _unit_normal(x1, x2):
    nx, ny, nz = _naive_normal(x1, x2)
    nn = _root(nx * nx + ny * ny + nz * nz)
    arc_zero = nn == 0
    if not _is_array(nn) and arc_zero:
        return arc_zero, 0.0, 0.0, 0.0
    return arc_zero, nx / nn, ny / nn, nz / nn


def _naive_cdo_kernel(x1, x2, z0):
    arc_zero, hx, hy, hz = _unit_normal(x1, x2)
    t2 = hx * hx + hy * hy
    s2 = t2 - z0 * z0
    code = _codes(arc_zero, t2 == 0, s2)
    if not _has_points(code):
        return code, None, None, None, None
    s = _root(s2)
    a = z0 * hx * hz
    b = z0 * hy * hz
    sy, sx = s * hy, s * hx
    return code, -((a + sy) / t2), -((b - sx) / t2), -((a - sy) / t2), -((b + sx) / t2)


def _naive_baseline_kernel(x1, x2, z0):
    arc_zero, hx, hy, hz = _unit_normal(x1, x2)
    d = 1.0 - hz * hz
    s2 = d - z0 * z0
    # d == 0 means the method cannot resolve the arc at all; it reports no
    # intersection by its own arithmetic rather than dividing by zero.
    code = _codes(arc_zero, (hx == 0) & (hy == 0), np.where(d == 0, -1.0, s2) if _is_array(d)
                  else (-1.0 if d == 0 else s2))
    if not _has_points(code):
        return code, None, None, None, None
    s = _root(s2)
    a = z0 * hx * hz
    b = z0 * hy * hz
    sy, sx = s * hy, s * hx
    return code, -((a + sy) / d), -((b - sx) / d), -((a - sy) / d), -((b + sx) / d)


def _accux_s2(n, z0, trace=None):
    """Compensated ``|n_xy|**2`` and ``s**2 = |n_xy|**2 - |n|**2 z0**2``."""
    (nx, enx), (ny, eny), (nz, enz) = n
    S2, s2 = sum_of_squares_c((nx, ny), (enx, eny))
    S3, s3 = sum_of_squares_c((nx, ny, nz), (enx, eny, enz))
    C, eC = two_prod(z0, z0)
    D, eD = comp_dot_c((S3, S3, s3, s3), (C, eC, C, eC))
    E, eE = two_sum(S2, -D)
    e = (s2 - eD) + eE
    sq = fast_two_sum(E, e)
    if trace is not None:
        trace.update(norm_n_sq=(S3, s3), norm_nxy_sq=(S2, s2), z0_sq=(C, eC),
                     n_sq_z0_sq=(D, eD), s_sq=sq)
    return (S2, s2), sq


def _accux_kernel(x1, x2, z0, trace=None):
    n = _accurate_normal(x1, x2)
    (nx, enx), (ny, eny), (nz, enz) = n
    (S2, _), (sq_hi, sq_lo) = _accux_s2(n, z0, trace)
    arc_zero = (nx == 0) & (enx == 0) & (ny == 0) & (eny == 0) & (nz == 0) & (enz == 0)
    code = _codes(arc_zero, S2 == 0, sq_hi)
    if trace is not None:
        trace.update(nx=(nx, enx), ny=(ny, eny), nz=(nz, enz))
    if not _has_points(code):
        return code, None, None, None, None
    if _is_array(sq_hi):
        neg = sq_hi < 0
        sq_hi, sq_lo = np.where(neg, 0.0, sq_hi), np.where(neg, 0.0, sq_lo)
    s, es = acc_sqrt(sq_hi, sq_lo)

    Fx, eFx1 = two_prod(nx, nz)
    eFx2 = nx * enz
    eFx3 = nz * enx
    eFx = (eFx1 + eFx2) + eFx3
    Fy, eFy1 = two_prod(ny, nz)
    eFy2 = ny * enz
    eFy3 = nz * eny
    eFy = (eFy1 + eFy2) + eFy3

    zs = (z0, z0, s, s, es, es)
    x_num = comp_dot((Fx, eFx, ny, eny, ny, eny), zs)
    y_num = comp_dot((Fy, eFy, -nx, -enx, -nx, -enx), zs)
    # Second point: the +-s terms change sign.
    x_num2 = comp_dot((Fx, eFx, -ny, -eny, -ny, -eny), zs)
    y_num2 = comp_dot((Fy, eFy, nx, enx, nx, enx), zs)
    if trace is not None:
        trace.update(s=(s, es), nx_nz=(Fx, eFx),
                     numerator=comp_dot_c((Fx, eFx, ny, eny, ny, eny), zs),
                     numerator_rounded=x_num, denominator_rounded=S2, px=x_num / S2)
    return code, -(x_num / S2), -(y_num / S2), -(x_num2 / S2), -(y_num2 / S2)


KERNELS: Dict[str, Callable] = {
    "naive-final": _naive_final_kernel,
    "naive-cdo": _naive_cdo_kernel,
    "naive-baseline": _naive_baseline_kernel,
    "accux": _accux_kernel,
}
METHODS = tuple(KERNELS)


def _solution(code, p1x, p1y, p2x, p2y, z0) -> IntersectionSolution:
    if code == DEG_ARC:
        raise DegenerateArc("endpoints are parallel")
    if code == DEG_EQUATORIAL:
        raise DegenerateEquatorial("arc lies in the equator plane")
    cls = _CODE_CLASS[code]
    if code == NONE:
        return IntersectionSolution(cls)
    p1 = Vec3(p1x, p1y, z0)
    if code == TANGENT:
        return IntersectionSolution(cls, p1)
    return IntersectionSolution(cls, p1, Vec3(p2x, p2y, z0))


def _run_scalar(kernel, q: ArcLatQuery) -> IntersectionSolution:
    return _solution(*kernel(q.x1, q.x2, q.z0), q.z0)


def accux(q: ArcLatQuery) -> IntersectionSolution:
    """Both intersection points of a canonicalized query, EFT-accurate.

    Returns ``NoIntersection`` when the compensated ``s**2`` is negative and
    ``Tangent`` (one point) when it is exactly zero.
    """
    return _run_scalar(_accux_kernel, q)


def intersect_naive_final(q: ArcLatQuery) -> IntersectionSolution:
    return _run_scalar(_naive_final_kernel, q)


def intersect_naive_cdo(q: ArcLatQuery) -> IntersectionSolution:
    return _run_scalar(_naive_cdo_kernel, q)


def intersect_naive_baseline(q: ArcLatQuery) -> IntersectionSolution:
    return _run_scalar(_naive_baseline_kernel, q)


def accux_trace(q: ArcLatQuery) -> dict:
    """Intermediate values of :func:`accux` on a canonical query.

    Keys follow the evaluation order: ``nx``, ``ny``, ``nz``, ``norm_n_sq``,
    ``norm_nxy_sq``, ``z0_sq``, ``n_sq_z0_sq``, ``s_sq``, ``s``, ``nx_nz``,
    ``numerator``, ``numerator_rounded``, ``denominator_rounded`` and ``px``
    (the first point's x coordinate before negation).  Compensated values are
    ``(hi, lo)`` pairs.
    """
    trace: dict = {}
    _accux_kernel(q.x1, q.x2, q.z0, trace)
    return trace


def naive_final_trace(q: ArcLatQuery) -> dict:
    """Same keys as :func:`accux_trace`, for the plain binary64 evaluation."""
    trace: dict = {}
    _naive_final_kernel(q.x1, q.x2, q.z0, trace)
    return trace


def classify(q: ArcLatQuery) -> Classification:
    """Number of intersections of a canonical query, from the compensated s**2."""
    n = cross_accurate(q.x1, q.x2)
    (S2, _), (sq, _) = _accux_s2(n, q.z0)
    if S2 == 0:
        raise DegenerateEquatorial("arc lies in the equator plane")
    if sq < 0:
        return Classification.NO_INTERSECTION
    return Classification.TANGENT if sq == 0 else Classification.TWO_POINTS


def intersect(q: ArcLatQuery, method: str = "accux") -> IntersectionSolution:
    """Validate, canonicalize, evaluate with ``method`` and map back.

    ``p1`` is always the point of the ``+s`` branch of the formula evaluated
    in the caller's frame, whatever reflections were used internally.

    Raises :class:`DegenerateArc`, :class:`DegenerateEquatorial` or
    ``ValueError`` for invalid input.
    """
    validate_query(q)
    kernel = KERNELS[method]
    cq, t = canonicalize(q)
    sol = _run_scalar(kernel, cq)
    points = [apply_inverse(t, p) for p in sol.points]
    if t.exchanges_points:
        points.reverse()
    return IntersectionSolution(sol.classification, *points)


# ---------------------------------------------------------------------------
# Batch evaluation
# ---------------------------------------------------------------------------


class QueryArrays(NamedTuple):
    """Structure-of-arrays form of many queries: ``x1``/``x2`` are (n, 3)."""

    x1: np.ndarray
    x2: np.ndarray
    z0: np.ndarray

    @classmethod
    def from_queries(cls, queries: Sequence[ArcLatQuery]) -> "QueryArrays":
        n = len(queries)
        x1 = np.array([q.x1 for q in queries], dtype=np.float64).reshape(n, 3)
        x2 = np.array([q.x2 for q in queries], dtype=np.float64).reshape(n, 3)
        z0 = np.array([q.z0 for q in queries], dtype=np.float64).reshape(n)
        return cls(x1, x2, z0)

    def __len__(self):
        return len(self.z0)


@dataclass
class BatchResult:
    """Per-query codes (0 none, 1 tangent, 2 two points, 3 degenerate arc,
    4 degenerate equatorial) and points; missing points are NaN."""

    codes: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def solution(self, i: int) -> IntersectionSolution:
        code = int(self.codes[i])
        return _solution(code, float(self.p1[i, 0]), float(self.p1[i, 1]),
                         float(self.p2[i, 0]), float(self.p2[i, 1]), float(self.p1[i, 2]))

    def checksum(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for a in (self.codes, self.p1, self.p2):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]


def canonicalize_arrays(qa: QueryArrays):
    """Vectorized :func:`canonicalize`.

    Returns the canonical arrays, an (n, 3) mask of coordinate reflections
    and a mask of queries whose two points exchange roles.
    """
    x1, x2, z0 = qa
    n = _accurate_normal(x1.T, x2.T)
    neg = [(hi < 0) | ((hi == 0) & (lo < 0)) for hi, lo in n]
    rz = z0 < 0
    fx, fy, fz = neg[0] ^ rz, neg[1] ^ rz, neg[2]
    swap = fx ^ fy ^ fz
    flips = np.stack([fy ^ swap, fx ^ swap, rz], axis=1)
    sign = np.where(flips, -1.0, 1.0)
    a, b = x1 * sign, x2 * sign
    sw = swap[:, None]
    c1, c2 = np.where(sw, b, a), np.where(sw, a, b)
    return QueryArrays(c1, c2, np.where(rz, -z0, z0)), flips, swap ^ rz


def _kernel_slice(kernel, qa: QueryArrays, lo: int, hi: int, lanes: int, out):
    codes, p1, p2 = out
    if lanes == 1:
        x1, x2, z0 = qa.x1[lo:hi].tolist(), qa.x2[lo:hi].tolist(), qa.z0[lo:hi].tolist()
        for k in range(hi - lo):
            code, ax, ay, bx, by = kernel(x1[k], x2[k], z0[k])
            codes[lo + k] = code
            if code in (TANGENT, TWO):
                p1[lo + k, 0], p1[lo + k, 1] = ax, ay
                if code == TWO:
                    p2[lo + k, 0], p2[lo + k, 1] = bx, by
        return
    for i in range(lo, hi, lanes):
        j = min(i + lanes, hi)
        x1, x2 = qa.x1[i:j].T, qa.x2[i:j].T
        code, ax, ay, bx, by = kernel(
            (x1[0].copy(), x1[1].copy(), x1[2].copy()),
            (x2[0].copy(), x2[1].copy(), x2[2].copy()),
            qa.z0[i:j].copy(),
        )
        codes[i:j] = code
        has = (code == TANGENT) | (code == TWO)
        two = code == TWO
        p1[i:j, 0] = np.where(has, ax, np.nan)
        p1[i:j, 1] = np.where(has, ay, np.nan)
        p2[i:j, 0] = np.where(two, bx, np.nan)
        p2[i:j, 1] = np.where(two, by, np.nan)


def run_kernel(method: str, qa: QueryArrays, lanes: int = 1, threads: int = 1,
               chunk: int = 4096) -> BatchResult:
    """Evaluate ``method`` on already-canonical queries, in the canonical frame.

    ``lanes == 1`` runs the scalar (Python float) instantiation element by
    element; ``lanes > 1`` runs the array instantiation on blocks of that
    width.  Work is split into ``chunk``-sized pieces that ``threads`` workers
    write into disjoint output slices, so the result does not depend on lanes,
    threads or chunking.
    """
    if lanes < 1 or threads < 1 or chunk < 1:
        raise ValueError("lanes, threads and chunk must be positive")
    kernel = KERNELS[method]
    n = len(qa)
    codes = np.zeros(n, dtype=np.int8)
    p1 = np.full((n, 3), np.nan)
    p2 = np.full((n, 3), np.nan)
    out = (codes, p1, p2)
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
    with np.errstate(all="ignore"):
        if threads == 1 or len(bounds) <= 1:
            for lo, hi in bounds:
                _kernel_slice(kernel, qa, lo, hi, lanes, out)
        else:
            with ThreadPoolExecutor(threads) as pool:
                list(pool.map(lambda b: _kernel_slice(kernel, qa, b[0], b[1], lanes, out), bounds))
    has = (codes == TANGENT) | (codes == TWO)
    p1[:, 2] = np.where(has, qa.z0, np.nan)
    p2[:, 2] = np.where(codes == TWO, qa.z0, np.nan)
    return BatchResult(codes, p1, p2)


def intersect_batch(qa: QueryArrays, method: str = "accux", lanes: int = 1,
                    threads: int = 1, chunk: int = 4096) -> BatchResult:
    """Batch :func:`intersect` without validation: canonicalize, run, map back.

    Degenerate queries are reported through ``codes``; the batch never aborts.
    """
    if len(qa) == 0:
        empty = np.empty((0, 3))
        return BatchResult(np.empty(0, dtype=np.int8), empty, empty.copy())
    with np.errstate(all="ignore"):
        cqa, flips, exch = canonicalize_arrays(qa)
    res = run_kernel(method, cqa, lanes, threads, chunk)
    sign = np.where(flips, -1.0, 1.0)
    p1, p2 = res.p1 * sign, res.p2 * sign
    # Tangent lanes keep their single point in p1.
    exch = (exch & (res.codes == TWO))[:, None]
    return BatchResult(res.codes, np.where(exch, p2, p1), np.where(exch, p1, p2))


def accux_batch(qa: QueryArrays, lanes: int = 1, threads: int = 1,
                chunk: int = 4096) -> BatchResult:
    return intersect_batch(qa, "accux", lanes, threads, chunk)


# ---------------------------------------------------------------------------
# Arc membership and published error bounds
# ---------------------------------------------------------------------------


def _kahan_cross(a, b):
    return _naive_normal(a, b)


def point_on_arc(p: Sequence[float], x1: Sequence[float], x2: Sequence[float]) -> bool:
    """Whether ``p`` (on the great circle) lies on the minor arc from x1 to x2.

    Tests ``(x1 x p) . n >= 0`` and ``(p x x2) . n >= 0``.  Not error-analyzed;
    ties resolve toward inclusion, so both endpoints count as on the arc.
    """
    n = _kahan_cross(x1, x2)
    return (comp_dot(_kahan_cross(x1, p), n) >= 0) and (comp_dot(_kahan_cross(p, x2), n) >= 0)


def naive_error_bound(q: ArcLatQuery) -> float:
    """First-order error bound ``(21/s + 19 sqrt(2)/|n_xy|) u`` of naive-final.

    ``s`` and ``|n_xy|`` are taken from the compensated evaluation, which is
    accurate to O(u**2).  Returns ``inf`` at tangency.
    """
    n = cross_accurate(q.x1, q.x2)
    (S2, s2), (sq, sq_lo) = _accux_s2(n, q.z0)
    if sq < 0:
        raise ValueError("query has no intersection")
    if sq == 0 or S2 == 0:
        return math.inf
    s, _ = acc_sqrt(sq, sq_lo)
    return (21.0 / s + 19.0 * math.sqrt(2.0) / math.sqrt(S2)) * U


def accux_error_bound(z0: float) -> float:
    """Leading-order AccuX point error bound ``3 sqrt(1 - z0**2) u``."""
    return 3.0 * math.sqrt(max(0.0, 1.0 - z0 * z0)) * U
