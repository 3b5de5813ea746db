"""Canonical study geometries and figure sweep grids.

Three parametric families cover the standard experiments: a 1-D pair of
equal segments separated by a gap, an L-shaped union of two rectangles, and
a fixed multi-room floor plan with a bounding-box simplification. The
descriptor classes carry the family parameters so sweeps can rebuild the
support when a geometric parameter changes; `build()` returns the support
and `with_param(name, value)` a modified descriptor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NonpositiveWidth, UnknownParam, ValidationError
from .geometry import RectMap, SegmentUnion, build_map, build_segments

SIGMA_DEFAULT = 3.0


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise NonpositiveWidth(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class TwoSegmentGeometry:
    """Two equal 1-D segments of width w separated by a gap dx."""

    w: float
    dx: float

    def __post_init__(self):
        _check_positive("w", self.w)
        if not (math.isfinite(self.dx) and self.dx >= 0.0):
            raise ValidationError(f"dx must be nonnegative and finite, got {self.dx}")

    def with_param(self, name: str, value: float) -> "TwoSegmentGeometry":
        if name not in ("w", "dx"):
            raise UnknownParam(f"two-segment geometry has no parameter {name!r}")
        return replace(self, **{name: float(value)})

    def build(self) -> SegmentUnion:
        return build_segments(
            [(0.0, self.w), (self.w + self.dx, 2.0 * self.w + self.dx)]
        )


@dataclass(frozen=True)
class LShapeGeometry:
    """L-shaped union: a (w1+w2) x h1 base with a w1 x h2 column on top."""

    w1: float
    w2: float
    h1: float
    h2: float

    def __post_init__(self):
        for name in ("w1", "w2", "h1", "h2"):
            _check_positive(name, getattr(self, name))

    def with_param(self, name: str, value: float) -> "LShapeGeometry":
        if name not in ("w1", "w2", "h1", "h2"):
            raise UnknownParam(f"L-shape geometry has no parameter {name!r}")
        return replace(self, **{name: float(value)})

    def build(self) -> RectMap:
        return build_map(
            [
                (0.0, 0.0, self.w1 + self.w2, self.h1),
                (0.0, self.h1, self.w1, self.h1 + self.h2),
            ]
        )


@dataclass(frozen=True)
class FixedAreaLShape:
    """L-shape with w1, h2, and the total area held fixed; h1 follows w2.

    Total area is (w1+w2)*h1 + w1*h2, so h1 = (area - w1*h2) / (w1 + w2).
    """

    w1: float
    h2: float
    area: float
    w2: float

    def __post_init__(self):
        for name in ("w1", "h2", "area", "w2"):
            _check_positive(name, getattr(self, name))
        _check_positive("h1", self.h1)

    @property
    def h1(self) -> float:
        return (self.area - self.w1 * self.h2) / (self.w1 + self.w2)

    def with_param(self, name: str, value: float) -> "FixedAreaLShape":
        if name != "w2":
            raise UnknownParam(
                f"the fixed-area L-shape sweeps only 'w2', got {name!r}"
            )
        return replace(self, w2=float(value))

    def build(self) -> RectMap:
        return LShapeGeometry(self.w1, self.w2, self.h1, self.h2).build()


def map1_support(w: float = 1.0, dx: float = 1.0) -> SegmentUnion:
    return TwoSegmentGeometry(w, dx).build()


def map2_map(
    w1: float = 5.0, w2: float = 5.0, h1: float = 5.0, h2: float = 5.0
) -> RectMap:
    return LShapeGeometry(w1, w2, h1, h2).build()


# Multi-room floor plan, 30 m x 20 m overall: a central corridor, three
# rooms below it and two above, separated by 0.2 m walls. Total area
# 582.92 m^2.
FLOOR_RECTS = (
    (0.0, 9.0, 30.0, 12.0),      # corridor
    (0.0, 0.0, 9.9, 8.8),        # lower rooms
    (10.1, 0.0, 19.9, 8.8),
    (20.1, 0.0, 30.0, 8.8),
    (0.0, 12.2, 14.9, 20.0),     # upper rooms
    (15.1, 12.2, 30.0, 20.0),
)


def floor_map() -> RectMap:
    return build_map(FLOOR_RECTS)


def floor_bounding_box() -> RectMap:
    """Single-rectangle simplification of the floor plan."""
    return build_map([(0.0, 0.0, 30.0, 20.0)])


def corner_anchors(support: RectMap):
    """Four anchors at the corners of the support's bounding box,
    counterclockwise from the lower-left."""
    box = support.bounding_box()
    return (
        (box.x_lo, box.y_lo),
        (box.x_hi, box.y_lo),
        (box.x_hi, box.y_hi),
        (box.x_lo, box.y_hi),
    )


# Sweep grids for the standard figures. Step multiples of 0.25 stay exact in
# binary, keeping published grids bit-stable.
FIG4_RHO = tuple(10.0 ** (-1.0 + 3.0 * k / 12.0) for k in range(13))
FIG5_DX = tuple(0.25 * k for k in range(1, 61)) + (20.0, 30.0)
FIG6_W = tuple(0.5 * k for k in range(1, 19))
FIG6_DX = tuple(0.5 * k for k in range(1, 25))
FIG7_W1 = 5.0
FIG7_H2 = 5.0
FIG7_AREA = 75.0
FIG7_W2 = tuple(0.5 * k for k in range(1, 31))
FIG8_SIGMA = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)

FIGURE_NUMBERS = (4, 5, 6, 7, 8)
