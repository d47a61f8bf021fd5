"""Planar geometry helpers shared across the scenario toolkit.

Conventions: angles are radians stored in [-pi, pi); the ego frame has +x
pointing along the ego heading ("north") and +y to the ego's left.
"""

from __future__ import annotations

import math

Point = tuple[float, float]

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    wrapped = math.fmod(theta + math.pi, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


def rotate(point: Point, angle: float) -> Point:
    """Rotate a point about the origin by `angle`."""
    c, s = math.cos(angle), math.sin(angle)
    x, y = point
    return (c * x - s * y, s * x + c * y)


def transform_point(point: Point, origin: Point, angle: float) -> Point:
    """Express a world point in the frame anchored at `origin` with heading `angle`."""
    return rotate((point[0] - origin[0], point[1] - origin[1]), -angle)


def norm(point: Point) -> float:
    return math.hypot(point[0], point[1])


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def heading_of(start: Point, end: Point) -> float:
    """Direction angle of the segment start -> end."""
    return math.atan2(end[1] - start[1], end[0] - start[0])


def midpoint(start: Point, end: Point) -> Point:
    return ((start[0] + end[0]) / 2.0, (start[1] + end[1]) / 2.0)


def line_angle_between(theta_a: float, theta_b: float) -> float:
    """Acute angle between two undirected lines given their direction angles.

    Result lies in [0, pi/2]; anti-parallel directions count as parallel.
    """
    diff = abs(wrap_angle(theta_a - theta_b))
    return min(diff, math.pi - diff)


def point_segment_distance(point: Point, start: Point, end: Point) -> float:
    """Euclidean distance from a point to a finite segment."""
    px, py = point
    sx, sy = start
    ex, ey = end
    dx, dy = ex - sx, ey - sy
    seg_sq = dx * dx + dy * dy
    if seg_sq <= 0.0:
        return math.hypot(px - sx, py - sy)
    t = ((px - sx) * dx + (py - sy) * dy) / seg_sq
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (sx + t * dx), py - (sy + t * dy))


def segment_intersection(
    a0: Point, a1: Point, b0: Point, b1: Point
) -> Point | None:
    """Intersection point of two finite segments, or None.

    Touching endpoints count as an intersection; parallel (including
    collinear overlapping) segments yield None since they have no unique
    crossing point.
    """
    ax, ay = a1[0] - a0[0], a1[1] - a0[1]
    bx, by = b1[0] - b0[0], b1[1] - b0[1]
    denom = ax * by - ay * bx
    if abs(denom) < 1e-12:
        return None
    dx, dy = b0[0] - a0[0], b0[1] - a0[1]
    t = (dx * by - dy * bx) / denom
    u = (dx * ay - dy * ax) / denom
    if -1e-12 <= t <= 1.0 + 1e-12 and -1e-12 <= u <= 1.0 + 1e-12:
        return (a0[0] + t * ax, a0[1] + t * ay)
    return None
