"""Accurate intersections of great-circle arcs with constant-latitude circles."""

from .eft import U
from .sphere import (
    ArcLatQuery,
    Classification,
    DegenerateArc,
    DegenerateEquatorial,
    IntersectionSolution,
    Vec3,
    accux,
    canonicalize,
    intersect,
)

__version__ = "0.1.0"

__all__ = [
    "U",
    "ArcLatQuery",
    "Classification",
    "DegenerateArc",
    "DegenerateEquatorial",
    "IntersectionSolution",
    "Vec3",
    "accux",
    "canonicalize",
    "intersect",
]
