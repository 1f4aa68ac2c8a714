"""Planar regions bounded by oriented circles and polygons."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon as ShapelyPolygon

from .config import DEFAULT, Options


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float
    orientation: int = 1  # +1 counterclockwise

    def __post_init__(self):
        if not self.r > 0:
            raise RegionError("circle radius must be positive")

    @property
    def length(self) -> float:
        return 2 * math.pi * self.r

    def points(self, s) -> np.ndarray:
        """Points at curve parameters ``s`` in [0, 1], traversed in the stored orientation."""
        th = 2 * math.pi * self.orientation * np.asarray(s, dtype=float)
        return np.stack([self.cx + self.r * np.cos(th), self.cy + self.r * np.sin(th)], axis=-1)

    def reversed(self) -> "Circle":
        return Circle(self.cx, self.cy, self.r, -self.orientation)

    def signed_area(self) -> float:
        return self.orientation * math.pi * self.r ** 2

    def bbox(self):
        return (self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r)

    def inside(self, x, y):
        return np.hypot(np.asarray(x) - self.cx, np.asarray(y) - self.cy) < self.r

    def boundary_distance(self, x, y):
        return np.abs(np.hypot(np.asarray(x) - self.cx, np.asarray(y) - self.cy) - self.r)

    def ring(self, n: int) -> np.ndarray:
        return self.points(np.arange(n) / n)

    def to_json(self):
        return {"circle": [self.cx, self.cy, self.r]}


@dataclass(frozen=True)
class PolygonCurve:
    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise RegionError("polygon needs at least three vertices")

    @property
    def _v(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def _cum(self) -> np.ndarray:
        v = self._v
        seg = np.hypot(*(np.roll(v, -1, axis=0) - v).T)
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(self._cum[-1])

    def points(self, s) -> np.ndarray:
        v = self._v
        closed = np.vstack([v, v[:1]])
        cum = self._cum
        t = np.mod(np.asarray(s, dtype=float), 1.0) * cum[-1]
        k = np.clip(np.searchsorted(cum, t, side="right") - 1, 0, len(v) - 1)
        seg_len = cum[k + 1] - cum[k]
        a = (t - cum[k]) / seg_len
        return closed[k] + a[..., None] * (closed[k + 1] - closed[k])

    def reversed(self) -> "PolygonCurve":
        return PolygonCurve(tuple(reversed(self.vertices)))

    def signed_area(self) -> float:
        v = self._v
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    @property
    def orientation(self) -> int:
        return 1 if self.signed_area() > 0 else -1

    def bbox(self):
        v = self._v
        return (*v.min(axis=0), *v.max(axis=0))

    def _shape(self):
        return ShapelyPolygon(self.vertices)

    def inside(self, x, y):
        return shapely.contains_xy(self._shape(), np.asarray(x, float), np.asarray(y, float))

    def boundary_distance(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        pts = shapely.points(x, y)
        return shapely.distance(self._shape().exterior, pts)

    def ring(self, n: int) -> np.ndarray:
        return self._v

    def to_json(self):
        return {"polygon": [list(v) for v in self.vertices]}


def _orient(curve, sign: int):
    ori = curve.orientation
    return curve if ori == sign else curve.reversed()


@dataclass(frozen=True)
class Region:
    """Interior of ``outer`` minus the closed interiors of ``holes``.

    Orientation is normalised on construction: outer boundary
    counterclockwise, holes clockwise.
    """

    outer: object
    holes: Tuple[object, ...] = ()
    chart: str = "plane"

    def __post_init__(self):
        object.__setattr__(self, "outer", _orient(self.outer, 1))
        object.__setattr__(self, "holes", tuple(_orient(h, -1) for h in self.holes))

    @classmethod
    def disk(cls, cx: float, cy: float, r: float, chart: str = "plane") -> "Region":
        return cls(Circle(float(cx), float(cy), float(r)), (), chart)

    def curves(self) -> List[object]:
        return [self.outer, *self.holes]

    def bbox(self):
        return self.outer.bbox()

    def contains(self, x, y):
        inside = np.asarray(self.outer.inside(x, y), dtype=bool)
        for h in self.holes:
            inside = inside & ~np.asarray(h.inside(x, y), dtype=bool)
        return inside

    def may_meet_box(self, cx, cy, h):
        """False only where the square ``|p - c|_inf <= h`` certainly misses the closed region."""
        reach = h * math.sqrt(2) * (1 + 1e-12)
        keep = self.outer.inside(cx, cy) | (self.outer.boundary_distance(cx, cy) <= reach)
        for hole in self.holes:
            swallowed = hole.inside(cx, cy) & (hole.boundary_distance(cx, cy) > reach)
            keep = keep & ~swallowed
        return np.asarray(keep, dtype=bool)

    def validate(self, opts: Options = DEFAULT) -> None:
        """Check that boundary curves are simple, disjoint, and holes lie inside."""
        n = opts.boundary_resolution
        rings = [LinearRing(c.ring(n)) for c in self.curves()]
        for i, ring in enumerate(rings):
            if not ring.is_simple:
                raise RegionError(f"boundary curve {i} is not simple")
        outer = ShapelyPolygon(rings[0])
        for i, ring in enumerate(rings[1:], 1):
            if not outer.contains(ShapelyPolygon(ring)) or outer.exterior.intersects(ring):
                raise RegionError(f"hole {i - 1} is not strictly inside the outer boundary")
            for j, other in enumerate(rings[i + 1:], i + 1):
                if ShapelyPolygon(ring).intersects(ShapelyPolygon(other)):
                    raise RegionError(f"holes {i - 1} and {j - 1} overlap")

    def to_json(self):
        out = {"chart": self.chart, **self.outer.to_json()}
        if self.holes:
            out["holes"] = [h.to_json() for h in self.holes]
        return out


def curve_from_json(obj) -> object:
    if "circle" in obj:
        cx, cy, r = obj["circle"]
        return Circle(float(cx), float(cy), float(r))
    if "polygon" in obj:
        return PolygonCurve(tuple((float(x), float(y)) for x, y in obj["polygon"]))
    raise RegionError("curve must be given as 'circle' or 'polygon'")


def region_from_json(obj, default_chart: str = "plane") -> Region:
    outer = curve_from_json(obj)
    holes = tuple(curve_from_json(h) for h in obj.get("holes", ()))
    return Region(outer, holes, obj.get("chart", default_chart))
