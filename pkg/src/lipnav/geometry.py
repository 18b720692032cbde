"""Planar convex geometry: hulls, closest points, outward normals, containment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateInput, DegenerateNormal, QueryInsideObstacle

# geometric coincidence tolerance in meters
TOL = 1e-9
# containment tolerance on edge cross products
INSIDE_TOL = 1e-12


class _P(NamedTuple):
    x: float
    y: float


class Point2(_P):
    """Immutable finite 2D point (meters)."""

    __slots__ = ()

    def __new__(cls, x: float, y: float) -> "Point2":
        x = float(x)
        y = float(y)
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite point ({x}, {y})")
        return super().__new__(cls, x, y)

    def dist(self, other: Sequence[float]) -> float:
        return math.hypot(self.x - other[0], self.y - other[1])


def as_point(p: Sequence[float]) -> Point2:
    return p if isinstance(p, Point2) else Point2(p[0], p[1])


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex polygon with counterclockwise vertices."""

    vertices: tuple[Point2, ...]
    _v: np.ndarray = field(init=False, repr=False)
    _normals: np.ndarray = field(init=False, repr=False)
    _edges: np.ndarray = field(init=False, repr=False)

    def __init__(self, vertices: Iterable[Sequence[float]]):
        verts = tuple(as_point(v) for v in vertices)
        m = len(verts)
        if m < 3:
            raise DegenerateInput(f"polygon needs at least 3 vertices, got {m}")
        for i in range(m):
            for j in range(i + 1, m):
                if verts[i].dist(verts[j]) <= TOL:
                    raise DegenerateInput(f"repeated vertex {verts[i]}")
        turn = 0.0
        for i in range(m):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % m]
            cr = _cross(a.x, a.y, b.x, b.y, c.x, c.y)
            if cr <= INSIDE_TOL:
                raise DegenerateInput(f"vertices not strictly convex CCW at index {i}")
            turn += math.atan2(cr, (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y))
        if abs(turn - 2 * math.pi) > 1e-6:
            raise DegenerateInput("vertex ordering is self-intersecting")
        v = np.array(verts, dtype=float)
        v.flags.writeable = False
        e = np.roll(v, -1, axis=0) - v
        n = np.column_stack([e[:, 1], -e[:, 0]]) / np.hypot(e[:, 0], e[:, 1])[:, None]
        n.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "_edges", e)
        object.__setattr__(self, "_v", v)
        object.__setattr__(self, "_normals", n)

    def __len__(self) -> int:
        return len(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConvexPolygon) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    @property
    def array(self) -> np.ndarray:
        """Read-only (m, 2) vertex array."""
        return self._v

    @property
    def edge_normals(self) -> np.ndarray:
        """Unit outward normal of edge i (from vertex i to i+1)."""
        return self._normals

    def centroid(self) -> Point2:
        v = self._v
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        area = cr.sum() / 2
        cx = ((v[:, 0] + w[:, 0]) * cr).sum() / (6 * area)
        cy = ((v[:, 1] + w[:, 1]) * cr).sum() / (6 * area)
        return Point2(cx, cy)

    def area(self) -> float:
        v = self._v
        w = np.roll(v, -1, axis=0)
        return float((v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]).sum() / 2)

    def flat(self) -> list[float]:
        return [c for p in self.vertices for c in p]

    def offset(self, radius: float, arc_segments: int = 4) -> "ConvexPolygon":
        """Outer approximation of the Minkowski sum with a disk.

        Each vertex is replaced by points on the tangent polygon of the
        rounding arc, so the result contains the exact offset shape.
        """
        if radius <= 0:
            return self
        pts = []
        n = self._normals
        m = len(self.vertices)
        for i in range(m):
            n_in, n_out = n[i - 1], n[i]
            a0 = math.atan2(n_in[1], n_in[0])
            a1 = math.atan2(n_out[1], n_out[0])
            sweep = (a1 - a0) % (2 * math.pi)
            k = max(1, math.ceil(arc_segments * sweep / (math.pi / 2)))
            # tangent polygon: push points out by 1/cos(half-step) to circumscribe the arc
            half = sweep / (2 * k)
            r = radius / math.cos(half)
            vx, vy = self.vertices[i]
            pts.append((vx + radius * n_in[0], vy + radius * n_in[1]))
            for j in range(k):
                a = a0 + half * (2 * j + 1)
                pts.append((vx + r * math.cos(a), vy + r * math.sin(a)))
            pts.append((vx + radius * n_out[0], vy + radius * n_out[1]))
        return convex_hull(pts)


@dataclass(frozen=True)
class ClosestPointResult:
    point: Point2
    feature: str  # "vertex" or "edge"
    index: int
    distance: float  # signed, negative inside

    @property
    def is_vertex(self) -> bool:
        return self.feature == "vertex"


def convex_hull(points: Iterable[Sequence[float]]) -> ConvexPolygon:
    """Monotone-chain hull; collinear and interior points are dropped."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        raise DegenerateInput(f"need at least 3 distinct points, got {len(pts)}")

    def chain(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2 and _cross(*out[-2], *out[-1], *p) <= INSIDE_TOL:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")
    # drop near-coincident neighbours left by the sort
    cleaned = [hull[0]]
    for p in hull[1:]:
        if math.hypot(p[0] - cleaned[-1][0], p[1] - cleaned[-1][1]) > TOL:
            cleaned.append(p)
    if len(cleaned) > 1 and math.hypot(cleaned[0][0] - cleaned[-1][0], cleaned[0][1] - cleaned[-1][1]) <= TOL:
        cleaned.pop()
    if len(cleaned) < 3:
        raise DegenerateInput("points are collinear")
    return ConvexPolygon(cleaned)


def point_in_polygon(poly: ConvexPolygon, q: Sequence[float]) -> bool:
    """True when q is inside or on the boundary."""
    v = poly.array
    e = poly._edges
    cr = e[:, 0] * (q[1] - v[:, 1]) - e[:, 1] * (q[0] - v[:, 0])
    return bool((cr >= -INSIDE_TOL).all())


def points_in_polygon(poly: ConvexPolygon, pts: np.ndarray) -> np.ndarray:
    """Vectorized point_in_polygon over an (n, 2) array."""
    v = poly.array
    ex = poly._edges[None, :, 0]
    ey = poly._edges[None, :, 1]
    cr = ex * (pts[:, 1:2] - v[None, :, 1]) - ey * (pts[:, 0:1] - v[None, :, 0])
    return np.all(cr >= -INSIDE_TOL, axis=1)


def signed_distances(poly: ConvexPolygon, pts: np.ndarray) -> np.ndarray:
    """Signed distance from each row of ``pts`` to the boundary (negative inside)."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    v = poly.array
    e = poly._edges
    rel_x = pts[:, 0:1] - v[None, :, 0]
    rel_y = pts[:, 1:2] - v[None, :, 1]
    t = (rel_x * e[None, :, 0] + rel_y * e[None, :, 1]) / (e[:, 0] ** 2 + e[:, 1] ** 2)[None, :]
    t = np.clip(t, 0.0, 1.0)
    d = np.hypot(rel_x - t * e[None, :, 0], rel_y - t * e[None, :, 1]).min(axis=1)
    inside = points_in_polygon(poly, pts)
    return np.where(inside, -d, d)


def _nearest_feature(poly: ConvexPolygon, qx: float, qy: float):
    best = None
    verts = poly.vertices
    m = len(verts)
    for i in range(m):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % m]
        ex, ey = bx - ax, by - ay
        t = ((qx - ax) * ex + (qy - ay) * ey) / (ex * ex + ey * ey)
        if t <= 0.0:
            cand = (math.hypot(qx - ax, qy - ay), "vertex", i, ax, ay)
        elif t >= 1.0:
            cand = (math.hypot(qx - bx, qy - by), "vertex", (i + 1) % m, bx, by)
        else:
            px, py = ax + t * ex, ay + t * ey
            cand = (math.hypot(qx - px, qy - py), "edge", i, px, py)
        # strict improvement only, or a vertex beating an edge at equal distance
        if best is None or cand[0] < best[0] - 1e-15 or (
            abs(cand[0] - best[0]) <= 1e-15 and cand[1] == "vertex" and best[1] == "edge"
        ):
            best = cand
    return best


def closest_point(
    poly: ConvexPolygon, q: Sequence[float], allow_inside: bool = False
) -> ClosestPointResult:
    """Closest boundary point of ``poly`` to ``q``.

    Raises QueryInsideObstacle for interior queries unless ``allow_inside``,
    in which case the distance is returned negated.
    """
    qx, qy = float(q[0]), float(q[1])
    d, feat, idx, cx, cy = _nearest_feature(poly, qx, qy)
    inside = point_in_polygon(poly, (qx, qy))
    if d <= TOL:
        return ClosestPointResult(Point2(cx, cy), feat, idx, 0.0)
    if inside:
        if not allow_inside:
            raise QueryInsideObstacle(f"query ({qx}, {qy}) is inside the polygon")
        return ClosestPointResult(Point2(cx, cy), feat, idx, -d)
    return ClosestPointResult(Point2(cx, cy), feat, idx, d)


def vertex_bisector(poly: ConvexPolygon, index: int) -> np.ndarray:
    n = poly.edge_normals
    b = n[index - 1] + n[index]
    return b / np.hypot(b[0], b[1])


def outward_normal(
    poly: ConvexPolygon, result: ClosestPointResult, q: Sequence[float]
) -> np.ndarray:
    """Unit normal of the supporting line at the closest point, facing away from the polygon."""
    if not result.is_vertex:
        return poly.edge_normals[result.index].copy()
    dx = q[0] - result.point.x
    dy = q[1] - result.point.y
    d = math.hypot(dx, dy)
    if d <= TOL:
        raise DegenerateNormal(f"query coincides with vertex {result.index}")
    if result.distance < 0:
        # inside: the vertex direction points inward, use the corner bisector
        return vertex_bisector(poly, result.index)
    return np.array([dx / d, dy / d])


def polygon_distance(a: ConvexPolygon, b: ConvexPolygon) -> float:
    """Euclidean distance between two convex polygons (0 when they overlap)."""
    if any(point_in_polygon(b, v) for v in a.vertices) or any(
        point_in_polygon(a, v) for v in b.vertices
    ):
        return 0.0
    if _edges_cross(a, b):
        return 0.0
    d1 = min(closest_point(b, v).distance for v in a.vertices)
    d2 = min(closest_point(a, v).distance for v in b.vertices)
    return min(d1, d2)


def _seg_intersect(p1, p2, p3, p4) -> bool:
    d1 = _cross(*p3, *p4, *p1)
    d2 = _cross(*p3, *p4, *p2)
    d3 = _cross(*p1, *p2, *p3)
    d4 = _cross(*p1, *p2, *p4)
    if ((d1 > 0 > d2) or (d1 < 0 < d2)) and ((d3 > 0 > d4) or (d3 < 0 < d4)):
        return True
    return False


def _edges_cross(a: ConvexPolygon, b: ConvexPolygon) -> bool:
    av, bv = a.vertices, b.vertices
    for i in range(len(av)):
        for j in range(len(bv)):
            if _seg_intersect(av[i], av[(i + 1) % len(av)], bv[j], bv[(j + 1) % len(bv)]):
                return True
    return False


def segment_hits_polygon(poly: ConvexPolygon, p: Sequence[float], q: Sequence[float]) -> bool:
    """True when the closed segment pq touches the polygon (boundary included).

    Cyrus-Beck clipping against the edge half-planes.
    """
    px, py = float(p[0]), float(p[1])
    dx, dy = float(q[0]) - px, float(q[1]) - py
    t0, t1 = 0.0, 1.0
    v = poly.array
    n = poly.edge_normals
    for i in range(len(v)):
        # inside the edge half-plane: n.(x - v_i) <= 0
        num = n[i, 0] * (px - v[i, 0]) + n[i, 1] * (py - v[i, 1])
        den = n[i, 0] * dx + n[i, 1] * dy
        if abs(den) < 1e-15:
            if num > TOL:
                return False
            continue
        t = -num / den
        if den < 0:
            t0 = max(t0, t - TOL)
        else:
            t1 = min(t1, t + TOL)
        if t0 > t1:
            return False
    return True
