"""Axis-aligned geometry for uniform-prior supports.

A 1-D support is a union of disjoint closed segments (SegmentUnion); a 2-D
support is a union of axis-aligned rectangles with pairwise disjoint interiors
(RectMap). Every bound formula consumes the same two decompositions: the slice
of a map along a horizontal or vertical line, and the map's partition into
strips over which that slice is constant. Strips make all bound integrals over
rectangular maps exact finite sums.

Conventions. Rectangles and segments are closed sets; `contains` reflects
that. Strip bands are half-open [y_lo, y_hi), except the topmost band which is
closed, so a slice taken exactly at an interior strip edge returns the slice
of the strip above. The two conventions can disagree only on the measure-zero
set of horizontal edges that bound the support from above. Abutting shapes
merge: gaps at or below MERGE_TOL (1e-9 m, far below any physical feature at
meter scale) are treated as contact.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import DegenerateRect, EmptyMap, OverlappingRects, ValidationError

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Segment:
    """Closed interval [lo, hi] with strictly positive length."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError(f"segment endpoints must be finite, got [{self.lo}, {self.hi}]")
        if not self.hi > self.lo:
            raise ValidationError(f"segment must have positive length, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class SegmentUnion:
    """Disjoint closed segments, sorted by lo.

    An empty union is a legal value only as the result of slicing a 2-D map
    outside its support; the 1-D map constructors reject it.
    """

    segments: tuple[Segment, ...]

    def __post_init__(self):
        for a, b in zip(self.segments, self.segments[1:]):
            if b.lo - a.hi <= MERGE_TOL:
                raise ValidationError(
                    f"segments must be sorted and separated by more than {MERGE_TOL}: "
                    f"[{a.lo},{a.hi}] then [{b.lo},{b.hi}]"
                )

    @property
    def is_empty(self) -> bool:
        return not self.segments

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def total_width(self) -> float:
        return sum(s.width for s in self.segments)

    @property
    def lo(self) -> float:
        return self.segments[0].lo

    @property
    def hi(self) -> float:
        return self.segments[-1].hi

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def widths(self) -> list[float]:
        return [s.width for s in self.segments]

    def gaps(self) -> list[float]:
        """Gap lengths between consecutive segments (n_segments - 1 values)."""
        return [b.lo - a.hi for a, b in zip(self.segments, self.segments[1:])]

    def contains(self, x: float) -> bool:
        return any(s.contains(x) for s in self.segments)

    def translated(self, d: float) -> "SegmentUnion":
        return SegmentUnion(tuple(Segment(s.lo + d, s.hi + d) for s in self.segments))


def _merge_intervals(pairs: list[tuple[float, float]]) -> tuple[Segment, ...]:
    pairs = sorted(pairs)
    merged: list[list[float]] = []
    for lo, hi in pairs:
        if merged and lo - merged[-1][1] <= MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple(Segment(lo, hi) for lo, hi in merged)


def build_segments(pairs) -> SegmentUnion:
    """Build a 1-D support from (lo, hi) pairs; abutting/overlapping pairs merge."""
    pairs = [(float(lo), float(hi)) for lo, hi in pairs]
    if not pairs:
        raise EmptyMap("a 1-D support needs at least one segment")
    for i, (lo, hi) in enumerate(pairs):
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValidationError(f"segment {i} has non-finite endpoints [{lo}, {hi}]")
        if not hi > lo:
            raise DegenerateRect(f"segment {i} has nonpositive length [{lo}, {hi}]")
    return SegmentUnion(_merge_intervals(pairs))


EMPTY_UNION = SegmentUnion(())


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle with positive width and height."""

    x_lo: float
    y_lo: float
    x_hi: float
    y_hi: float

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> float:
        return self.y_hi - self.y_lo

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, x: float, y: float) -> bool:
        return self.x_lo <= x <= self.x_hi and self.y_lo <= y <= self.y_hi


@dataclass(frozen=True)
class RectMap:
    """Union of axis-aligned rectangles with pairwise disjoint interiors."""

    rects: tuple[Rect, ...]

    @property
    def n_rects(self) -> int:
        return len(self.rects)

    @property
    def x_lo(self) -> float:
        return min(r.x_lo for r in self.rects)

    @property
    def x_hi(self) -> float:
        return max(r.x_hi for r in self.rects)

    @property
    def y_lo(self) -> float:
        return min(r.y_lo for r in self.rects)

    @property
    def y_hi(self) -> float:
        return max(r.y_hi for r in self.rects)

    def bounding_box(self) -> Rect:
        return Rect(self.x_lo, self.y_lo, self.x_hi, self.y_hi)

    def translated(self, dx: float, dy: float) -> "RectMap":
        return RectMap(
            tuple(Rect(r.x_lo + dx, r.y_lo + dy, r.x_hi + dx, r.y_hi + dy) for r in self.rects)
        )


@dataclass(frozen=True)
class Strip:
    """Band of constant slice. `band` is the y-interval for horizontal strips
    (x-interval for vertical ones); `slice` holds the constant cross-section."""

    band: Segment
    slice: SegmentUnion


def _as_rect(obj, index: int) -> Rect:
    if isinstance(obj, Rect):
        r = obj
    else:
        try:
            x_lo, y_lo, x_hi, y_hi = obj
        except (TypeError, ValueError):
            raise ValidationError(f"rect {index}: expected Rect or (x_lo, y_lo, x_hi, y_hi)")
        r = Rect(float(x_lo), float(y_lo), float(x_hi), float(y_hi))
    for v in (r.x_lo, r.y_lo, r.x_hi, r.y_hi):
        if not math.isfinite(v):
            raise ValidationError(f"rect {index} has non-finite coordinates")
    if r.width <= 0 or r.height <= 0:
        raise DegenerateRect(f"rect {index} has nonpositive side: {r}")
    return r


def build_map(rects) -> RectMap:
    """Validate and build a RectMap. Shared edges are fine; interior overlap
    above MERGE_TOL in both axes is rejected."""
    rects = list(rects)
    if not rects:
        raise EmptyMap("a map needs at least one rectangle")
    checked = [_as_rect(r, i) for i, r in enumerate(rects)]
    for i in range(len(checked)):
        for j in range(i + 1, len(checked)):
            a, b = checked[i], checked[j]
            ox = min(a.x_hi, b.x_hi) - max(a.x_lo, b.x_lo)
            oy = min(a.y_hi, b.y_hi) - max(a.y_lo, b.y_lo)
            if ox > MERGE_TOL and oy > MERGE_TOL:
                raise OverlappingRects(f"rects {i} and {j} have intersecting interiors")
    return RectMap(tuple(checked))


def area(rmap: RectMap) -> float:
    """Total support area (m^2); interiors are disjoint so rectangle areas sum."""
    return sum(r.area for r in rmap.rects)


def contains(rmap: RectMap, p) -> bool:
    """Membership in the closed union."""
    x, y = p
    return any(r.contains(x, y) for r in rmap.rects)


def _cluster_edges(values: list[float]) -> list[float]:
    # collapse edges closer than MERGE_TOL to a single representative
    values = sorted(values)
    out = [values[0]]
    for v in values[1:]:
        if v - out[-1] > MERGE_TOL:
            out.append(v)
    return out


@lru_cache(maxsize=256)
def strips_h(rmap: RectMap) -> tuple[Strip, ...]:
    """Horizontal strips: bands between consecutive distinct y-edges whose
    slice is nonempty. Bands partition the support's y-projection."""
    edges = _cluster_edges([r.y_lo for r in rmap.rects] + [r.y_hi for r in rmap.rects])
    strips = []
    for lo, hi in zip(edges, edges[1:]):
        mid = 0.5 * (lo + hi)
        xs = [(r.x_lo, r.x_hi) for r in rmap.rects if r.y_lo <= mid <= r.y_hi]
        if xs:
            strips.append(Strip(Segment(lo, hi), SegmentUnion(_merge_intervals(xs))))
    return tuple(strips)


@lru_cache(maxsize=256)
def strips_v(rmap: RectMap) -> tuple[Strip, ...]:
    """Vertical strips: bands between consecutive distinct x-edges."""
    edges = _cluster_edges([r.x_lo for r in rmap.rects] + [r.x_hi for r in rmap.rects])
    strips = []
    for lo, hi in zip(edges, edges[1:]):
        mid = 0.5 * (lo + hi)
        ys = [(r.y_lo, r.y_hi) for r in rmap.rects if r.x_lo <= mid <= r.x_hi]
        if ys:
            strips.append(Strip(Segment(lo, hi), SegmentUnion(_merge_intervals(ys))))
    return tuple(strips)


def _slice_from_strips(strips: tuple[Strip, ...], t: float) -> SegmentUnion:
    for s in strips:
        if s.band.lo <= t < s.band.hi:
            return s.slice
    # topmost band is closed so the global top edge still has support
    if strips and t == strips[-1].band.hi:
        return strips[-1].slice
    return EMPTY_UNION


def slice_h(rmap: RectMap, y: float) -> SegmentUnion:
    """Cross-section of the support along the horizontal line at height y.
    Empty result (no support) if y falls outside every strip band."""
    return _slice_from_strips(strips_h(rmap), y)


def slice_v(rmap: RectMap, x: float) -> SegmentUnion:
    """Cross-section along the vertical line at x."""
    return _slice_from_strips(strips_v(rmap), x)


def load_map(path):
    """Load a support from a JSON map file.

    2-D: {"unit": "m", "rects": [{"x":, "y":, "w":, "h":}, ...]}
    1-D: {"unit": "m", "segments": [[lo, hi], ...]}
    Returns RectMap or SegmentUnion. Errors name the offending entry index.
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"map file is not valid JSON: {e}")
    return parse_map(doc)


def parse_map(doc):
    if not isinstance(doc, dict):
        raise ValidationError("map file must contain a JSON object")
    if doc.get("unit") != "m":
        raise ValidationError(f"map file unit must be 'm', got {doc.get('unit')!r}")
    if "rects" in doc:
        rects = []
        for i, r in enumerate(doc["rects"]):
            try:
                x, y, w, h = float(r["x"]), float(r["y"]), float(r["w"]), float(r["h"])
            except (KeyError, TypeError, ValueError):
                raise ValidationError(f"rect {i}: expected fields x, y, w, h")
            if w <= 0 or h <= 0:
                raise DegenerateRect(f"rect {i}: width and height must be positive")
            rects.append(Rect(x, y, x + w, y + h))
        return build_map(rects)
    if "segments" in doc:
        try:
            return build_segments(doc["segments"])
        except (TypeError, ValueError) as e:
            if isinstance(e, ValidationError):
                raise
            raise ValidationError(f"bad segments list: {e}")
    raise ValidationError("map file needs a 'rects' or 'segments' key")


def map_to_doc(support) -> dict:
    """Serialize a support back to the JSON map schema."""
    if isinstance(support, RectMap):
        return {
            "unit": "m",
            "rects": [
                {"x": r.x_lo, "y": r.y_lo, "w": r.width, "h": r.height} for r in support.rects
            ],
        }
    if isinstance(support, SegmentUnion):
        return {"unit": "m", "segments": [[s.lo, s.hi] for s in support.segments]}
    raise ValidationError(f"cannot serialize {type(support).__name__}")


def save_map(support, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(map_to_doc(support), f, indent=2)
        f.write("\n")
