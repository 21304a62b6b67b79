"""Correctly rounded fused multiply-add for Python floats and float64 arrays.

Python 3.10 has no ``math.fma``.  Scalars go through the C library's ``fma``
(correctly rounded on glibc, with or without hardware FMA); arrays go through
a numba ufunc that lowers to ``llvm.fma.f64``.  Every backend is probed at
first use against an exact rational evaluation and replaced by
:func:`soft_fma` if it does not round correctly.
"""

from __future__ import annotations

import ctypes
import ctypes.util
import logging
import math
from fractions import Fraction

import numpy as np

log = logging.getLogger(__name__)

__all__ = ["fma", "soft_fma", "scalar_backend", "array_backend"]


def soft_fma(a: float, b: float, c: float) -> float:
    """Return ``a*b + c`` with a single rounding, using exact rationals.

    Slow, but obviously correct; used as the fallback backend and as the
    reference the hardware backends are checked against.
    """
    a, b, c = float(a), float(b), float(c)
    if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(c)):
        return a * b + c
    exact = Fraction(a) * Fraction(b) + Fraction(c)
    if exact == 0:
        # IEEE 754 sign-of-zero rule for an exact zero sum.
        prod_neg = math.copysign(1.0, a) * math.copysign(1.0, b) < 0
        if a * b == 0 and c == 0 and prod_neg and math.copysign(1.0, c) < 0:
            return -0.0
        return 0.0
    try:
        return exact.numerator / exact.denominator
    except OverflowError:
        return math.inf if exact > 0 else -math.inf


# Cases where a*b+c computed with two roundings differs from one rounding.
_PROBES = [
    (134217729.0, 134217729.0, -18014398777917440.0),
    (1.0 + 2.0**-30, 1.0 - 2.0**-30, -1.0),
    (0.1, 10.0, -1.0),
    (1.0 + 2.0**-52, 1.0 + 2.0**-52, -(1.0 + 2.0**-51)),
    (3.0, 1.0 / 3.0, -1.0),
    (-0.0, 1.0, -0.0),
]


def _probe(fn) -> bool:
    for a, b, c in _PROBES:
        got, want = fn(a, b, c), soft_fma(a, b, c)
        if got != want or math.copysign(1.0, got) != math.copysign(1.0, want):
            return False
    return True


def _load_scalar():
    fn = getattr(math, "fma", None)
    if fn is not None and _probe(fn):
        return fn, "math.fma"
    path = ctypes.util.find_library("m")
    if path:
        try:
            cfn = ctypes.CDLL(path).fma
            cfn.restype = ctypes.c_double
            cfn.argtypes = (ctypes.c_double, ctypes.c_double, ctypes.c_double)
        except (OSError, AttributeError):
            cfn = None
        if cfn is not None and _probe(cfn):
            return cfn, "libm"
    log.warning("no correctly rounded fma in libm; using software fma")
    return soft_fma, "soft"


_scalar_fma, scalar_backend = _load_scalar()

_array_impl = None
array_backend = "unloaded"


def _load_array():
    global _array_impl, array_backend
    try:
        from numba import float64, vectorize
        from numba.extending import intrinsic

        @intrinsic
        def _llvm_fma(typingctx, a, b, c):
            sig = float64(float64, float64, float64)

            def codegen(context, builder, signature, args):
                return builder.fma(*args)

            return sig, codegen

        @vectorize([float64(float64, float64, float64)], nopython=True, cache=True)
        def _vfma(a, b, c):
            return _llvm_fma(a, b, c)

        if _probe(lambda a, b, c: float(_vfma(a, b, c))):
            _array_impl, array_backend = _vfma, "numba"
            return
        log.warning("numba fma failed the rounding probe")
    except Exception as exc:  # numba missing or broken
        log.info("numba unavailable for vectorized fma: %s", exc)
    ufunc = np.frompyfunc(_scalar_fma, 3, 1)
    _array_impl = lambda a, b, c: ufunc(a, b, c).astype(np.float64)  # noqa: E731
    array_backend = "frompyfunc:" + scalar_backend


def fma(a, b, c):
    """``a*b + c`` rounded once; works on floats and float64 arrays alike."""
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) or isinstance(c, np.ndarray):
        if _array_impl is None:
            _load_array()
        return _array_impl(a, b, c)
    return _scalar_fma(a, b, c)
