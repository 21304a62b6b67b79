"""Error-free transformations and the compensated operators built on them.

Every function here is a straight-line sequence of IEEE 754 binary64
operations and accepts either Python floats or equally shaped float64 numpy
arrays.  Both kinds of input go through the same operations in the same
order, so an array result is bit-identical, element by element, to the
scalar result.  Nothing is ever contracted: an FMA appears only where the
algorithm calls :func:`fma` explicitly.

Compensated results are returned as ``(hi, lo)`` tuples whose value is the
unevaluated sum ``hi + lo``.

Inputs are assumed to lie in the magnitude range [2**-500, 2**500] (or be
zero) so that no intermediate overflows or underflows; this is documented,
not checked.
"""

from __future__ import annotations

import math
import os
from typing import Sequence, Tuple

import numpy as np

from ._fma import fma

__all__ = [
    "U",
    "fma",
    "two_sum",
    "fast_two_sum",
    "two_prod",
    "kahan_dop",
    "accu_dop",
    "comp_dot_c",
    "comp_dot",
    "sum_non_neg",
    "sum_of_squares",
    "sum_of_squares_c",
    "acc_sqrt",
    "compdot_error_bound",
]

#: Unit roundoff of binary64 under round-to-nearest.
U = 2.0**-53

Pair = Tuple[float, float]

#: Precondition checks for fast_two_sum / sum_non_neg; off unless XSECT_DEBUG is set.
DEBUG = os.environ.get("XSECT_DEBUG", "") not in ("", "0")


def _check_rounding_mode():
    # Python cannot change the FPU mode, so the best we can do is refuse to run
    # under anything other than round-to-nearest, ties-to-even.
    one = 1.0
    ok = (
        one + U == one
        and (one + 2 * U) + U == one + 4 * U
        and -one - U == -one
        and one + U * (1.0 + 2.0**-52) == one + 2 * U
    )
    if not ok:
        raise RuntimeError("binary64 round-to-nearest-even arithmetic is required")


_check_rounding_mode()


def _is_array(*xs) -> bool:
    return any(isinstance(x, np.ndarray) for x in xs)


def _sqrt(x):
    if isinstance(x, np.ndarray):
        return np.sqrt(x)
    return math.sqrt(x)


def two_sum(a, b) -> Pair:
    """Knuth's TwoSum: ``hi = fl(a + b)`` and ``hi + lo == a + b`` exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def fast_two_sum(a, b) -> Pair:
    """Dekker's FastTwoSum; exact provided ``|a| >= |b|`` or ``a == 0``."""
    if DEBUG:
        ok = (abs(a) >= abs(b)) | (a == 0)
        assert np.all(ok), "fast_two_sum requires |a| >= |b|"
    s = a + b
    err = b - (s - a)
    return s, err


def two_prod(a, b) -> Pair:
    """Exact product as ``(fl(a*b), a*b - fl(a*b))`` using one FMA."""
    p = a * b
    return p, fma(a, b, -p)


def kahan_dop(a, b, c, d):
    """Kahan's 2x2 determinant ``a*d - b*c``, relative error at most 2u."""
    bc = b * c
    err = fma(-b, c, bc)
    dop = fma(a, d, -bc)
    return dop + err


def accu_dop(a, b, c, d) -> Pair:
    """Compensated difference of products ``a*d - b*c`` as a pair.

    The residual combines the two product errors as ``r1 - r2``: since
    ``a*d - b*c = (p1 + r1) - (p2 + r2)``, that is the sign that makes the
    compensation exact up to the two final roundings.  The relative error is
    at most ``(1 + 2(|ad| + |bc|)/|ad - bc|) u**2 + O(u**3)``.  The pair is
    not normalized.
    """
    p1, r1 = two_prod(a, d)
    p2, r2 = two_prod(b, c)
    dop, s = two_sum(p1, -p2)
    err = s + (r1 - r2)
    return dop, err


def comp_dot_c(x: Sequence, y: Sequence) -> Pair:
    """Compensated dot product returning the unrounded ``(p, s)`` pair.

    Same loop as Ogita-Rump-Oishi Dot2, minus the final ``fl(p + s)``.
    """
    p, s = two_prod(x[0], y[0])
    for i in range(1, len(x)):
        h, r = two_prod(x[i], y[i])
        p, q = two_sum(p, h)
        s = s + (q + r)
    return p, s


def comp_dot(x: Sequence, y: Sequence):
    p, s = comp_dot_c(x, y)
    return p + s


def sum_non_neg(A: Pair, B: Pair) -> Pair:
    """Add two non-negative normalized pairs; relative error <= 3u**2."""
    (A, a), (B, b) = A, B
    if DEBUG:
        assert np.all((A >= 0) & (B >= 0)), "sum_non_neg requires non-negative inputs"
    H, h = two_sum(A, B)
    c = a + b
    d = h + c
    return fast_two_sum(H, d)


def sum_of_squares(x: Sequence) -> Pair:
    """Squared 2-norm as a normalized pair (TwoProd + SumNonNeg per term)."""
    acc = (0.0, 0.0)
    for xj in x:
        acc = sum_non_neg(acc, two_prod(xj, xj))
    return acc


def sum_of_squares_c(x: Sequence, e: Sequence) -> Pair:
    """Squared norm of the vector whose entries are the pairs ``x[i] + e[i]``.

    The ``e[i]**2`` terms are dropped; they are O(u**2) relative to the
    result when the compensations are O(u) relative to ``x``.  The closing
    FastTwoSum leaves ``|lo| <= u |hi|``.
    """
    S, s = sum_of_squares(x)
    R = fma(2.0, comp_dot(x, e), s)
    return fast_two_sum(S, R)


def acc_sqrt(H, h) -> Pair:
    """Square root of the pair ``H + h`` with relative error <= (25/8) u**2.

    Requires ``H >= 0`` and ``|h| <= u*H``.  A negative ``H`` raises
    ``ValueError`` for scalars and yields NaN lanes for arrays.
    """
    if _is_array(H, h):
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.sqrt(H)
            r = fma(-s, s, H)
            lo = (r + h) / (2.0 * s)
        return s, np.where(H == 0, 0.0, lo)
    if H == 0:
        return 0.0 * H, 0.0
    s = math.sqrt(H)
    r = fma(-s, s, H)
    return s, (r + h) / (2.0 * s)


def compdot_error_bound(n: int, abs_dot: float, dot: float) -> float:
    """Relative error bound of :func:`comp_dot_c` for length-``n`` vectors.

    ``abs_dot`` is ``|x| . |y|``.  Returns ``inf`` when ``dot`` is zero.
    """
    if dot == 0:
        return math.inf
    if n * U >= 1:
        raise ValueError("n*u must be below 1")
    gamma = n * U / (1 - n * U)
    return gamma * (n * U / (1 - (n - 1) * U)) * abs_dot / abs(dot)
