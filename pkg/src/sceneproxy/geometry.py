"""2D box and small 3D vector/quaternion primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]  # (w, x, y, z)


@dataclass(frozen=True)
class BBox2D:
    """Axis-aligned pixel box, top-left origin."""

    x: float
    y: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2, self.y + self.h / 2)

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]


def iou(a: BBox2D, b: BBox2D) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    union = a.area + b.area - inter
    return inter / union


def contains(parent: BBox2D, child: BBox2D, slack_px: float = 0.0) -> bool:
    """True iff ``child`` fits inside ``parent`` inflated by ``slack_px`` per side."""
    return (
        child.x >= parent.x - slack_px
        and child.y >= parent.y - slack_px
        and child.x + child.w <= parent.x + parent.w + slack_px
        and child.y + child.h <= parent.y + parent.h + slack_px
    )


def boxes_intersect(a: BBox2D, b: BBox2D) -> bool:
    """Positive-area overlap; edge contact does not count."""
    return (
        min(a.x + a.w, b.x + b.w) - max(a.x, b.x) > 0
        and min(a.y + a.h, b.y + b.h) - max(a.y, b.y) > 0
    )


# -- 3D helpers ---------------------------------------------------------------


def v_add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def v_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def v_scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def v_dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def v_cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def v_norm(a: Vec3) -> float:
    return math.sqrt(v_dot(a, a))


def v_normalize(a: Vec3) -> Vec3:
    n = v_norm(a)
    if n == 0:
        raise ValueError("cannot normalize zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def quat_norm(q: Quat) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def quat_rotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate ``v`` by unit quaternion ``q`` (w, x, y, z)."""
    w, qx, qy, qz = q
    u = (qx, qy, qz)
    t = v_scale(v_cross(u, v), 2.0)
    return v_add(v_add(v, v_scale(t, w)), v_cross(u, t))


def quat_conjugate(q: Quat) -> Quat:
    return (q[0], -q[1], -q[2], -q[3])
