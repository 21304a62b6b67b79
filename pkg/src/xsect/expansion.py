"""Nonoverlapping floating-point expansions (Shewchuk-style exact arithmetic).

An expansion is a tuple of binary64 components, nonoverlapping and sorted by
increasing magnitude, whose exact sum is the represented value.  Sums and
products are exact; square roots and quotients are computed to a requested
number of bits by iterations whose residuals are evaluated exactly.

Values are kept compressed and limited to :data:`MAX_COMPONENTS` components;
exceeding that raises :class:`OracleError` instead of truncating.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Tuple, Union

from .eft import two_prod

__all__ = [
    "MAX_COMPONENTS",
    "OracleError",
    "Expansion",
    "exp_add",
    "exp_sub",
    "exp_mul",
    "exp_sqrt",
    "exp_div",
]

MAX_COMPONENTS = 16


class OracleError(ArithmeticError):
    """Expansion capacity exceeded or an iteration failed to converge."""


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _grow(e: Tuple[float, ...], b: float) -> list:
    out = []
    q = b
    for c in e:
        q, h = _two_sum(q, c)
        if h:
            out.append(h)
    if q or not out:
        out.append(q)
    return out


def _compress(e) -> Tuple[float, ...]:
    if not e:
        return ()
    m = len(e)
    g = list(e)
    bottom = m - 1
    q = g[bottom]
    for i in range(m - 2, -1, -1):
        enow = g[i]
        qnew = q + enow
        lo = enow - (qnew - q)
        if lo:
            g[bottom] = qnew
            bottom -= 1
            q = lo
        else:
            q = qnew
    g[bottom] = q
    out = []
    for i in range(bottom + 1, m):
        hnow = g[i]
        qnew = hnow + q
        lo = q - (qnew - hnow)
        if lo:
            out.append(lo)
        q = qnew
    out.append(q)
    if len(out) == 1 and out[0] == 0:
        return ()
    if len(out) > MAX_COMPONENTS:
        raise OracleError(f"expansion needs {len(out)} components (limit {MAX_COMPONENTS})")
    return tuple(out)


def _sum(e, f) -> Tuple[float, ...]:
    h = list(e)
    for c in f:
        h = _grow(h, c)
    return _compress(h)


def _scale(e, b: float) -> list:
    if not e or b == 0:
        return []
    q, h = two_prod(e[0], b)
    out = [h] if h else []
    for c in e[1:]:
        t_hi, t_lo = two_prod(c, b)
        q, h = _two_sum(q, t_lo)
        if h:
            out.append(h)
        s = t_hi + q
        h = q - (s - t_hi)
        if h:
            out.append(h)
        q = s
    out.append(q)
    return out


Number = Union["Expansion", float, int]


class Expansion:
    """Immutable exact value; arithmetic operators mix with floats."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[float] = ()):
        comps = [float(c) for c in components]
        for c in comps:
            if not math.isfinite(c):
                raise OracleError("expansion components must be finite")
        # Arbitrary components are accumulated one by one, so callers need not
        # pass them sorted or nonoverlapping.
        self.components: Tuple[float, ...] = _sum((), comps) if len(comps) > 1 else (
            tuple(c for c in comps if c))

    @classmethod
    def _raw(cls, comps: Tuple[float, ...]) -> "Expansion":
        e = object.__new__(cls)
        e.components = comps
        return e

    @staticmethod
    def coerce(x: Number) -> "Expansion":
        return x if isinstance(x, Expansion) else Expansion((float(x),))

    # Exact value and rounding -------------------------------------------------

    def fraction(self) -> Fraction:
        return sum((Fraction(c) for c in self.components), Fraction(0))

    def __float__(self) -> float:
        # fsum rounds the exact sum correctly (ties to even).
        return math.fsum(self.components)

    def sign(self) -> int:
        if not self.components:
            return 0
        return 1 if self.components[-1] > 0 else -1

    def is_zero(self) -> bool:
        return not self.components

    def __len__(self):
        return len(self.components)

    def __repr__(self):
        return f"Expansion([{', '.join(c.hex() for c in self.components)}])"

    def __eq__(self, other):
        if isinstance(other, (Expansion, float, int)):
            return self.fraction() == Expansion.coerce(other).fraction()
        return NotImplemented

    def __hash__(self):
        return hash(self.fraction())

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    # Arithmetic ---------------------------------------------------------------

    def __neg__(self):
        return Expansion._raw(tuple(-c for c in self.components))

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __add__(self, other):
        return exp_add(self, Expansion.coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return exp_add(self, -Expansion.coerce(other))

    def __rsub__(self, other):
        return exp_add(Expansion.coerce(other), -self)

    def __mul__(self, other):
        if isinstance(other, Expansion):
            return exp_mul(self, other)
        return Expansion._raw(_compress(_scale(self.components, float(other))))

    __rmul__ = __mul__


def exp_add(a: Expansion, b: Expansion) -> Expansion:
    """Exact sum, compressed."""
    if not b.components:
        return a
    if not a.components:
        return b
    return Expansion._raw(_sum(a.components, b.components))


def exp_sub(a: Expansion, b: Expansion) -> Expansion:
    return exp_add(a, -b)


def exp_mul(a: Expansion, b: Expansion) -> Expansion:
    """Exact product: one scaled copy of ``a`` per component of ``b``."""
    if len(a) < len(b):
        a, b = b, a
    acc: Tuple[float, ...] = ()
    for c in b.components:
        acc = _sum(acc, _scale(a.components, c))
    return Expansion._raw(acc)


def _check_bits(target_bits: int):
    if not 1 <= target_bits <= 424:
        raise ValueError("target_bits must be in [1, 424]")


def exp_sqrt(a: Expansion, target_bits: int = 212) -> Expansion:
    """Square root with relative error at most ``2**-target_bits``.

    Newton steps ``x += (a - x*x) / (2x)`` from the binary64 seed; the
    residual is exact, so each step adds about 50 correct bits.  It is
    updated as ``r -= c*(2x + c)`` rather than recomputed, so the full
    square of a long ``x`` (twice its bits) is never formed.
    """
    _check_bits(target_bits)
    if a.sign() < 0:
        raise ValueError("square root of a negative expansion")
    if a.is_zero():
        return a
    af = float(a)
    x0 = math.sqrt(af)
    x = Expansion((x0,))
    r = a - Expansion(two_prod(x0, x0))
    # |x - sqrt(a)| / sqrt(a) is about |a - x*x| / (2a).
    tol = math.ldexp(af, 1 - target_bits)
    for _ in range(target_bits // 40 + 4):
        rf = float(r)
        if abs(rf) <= tol:
            return x
        c = rf / (2.0 * float(x))
        r = r - (x * (2.0 * c) + Expansion(two_prod(c, c)))
        x = x + c
    raise OracleError("square root iteration did not converge")


def exp_div(a: Expansion, b: Expansion, target_bits: int = 212) -> Expansion:
    """Quotient ``a / b`` with relative error at most ``2**-target_bits``.

    Long division: each step divides the exact remainder by ``float(b)`` and
    subtracts the exact product back out.
    """
    _check_bits(target_bits)
    if b.is_zero():
        raise ZeroDivisionError("division by a zero expansion")
    if a.is_zero():
        return a
    bf = float(b)
    tol = math.ldexp(abs(float(a)), -target_bits - 1)
    q = Expansion()
    r = a
    for _ in range(target_bits // 40 + 4):
        rf = float(r)
        if abs(rf) <= tol:
            return q
        c = rf / bf
        q = q + c
        r = r - b * c
    raise OracleError("division did not converge")
