"""Axis-aligned box geometry shared by movement, picking, rendering and planning.

Coordinate system: x east, z north, y up.  Yaw is degrees clockwise from +z
(so yaw 0 faces north, yaw 90 faces east); pitch is degrees, positive looking
downward.  All distances are meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EPS = 1e-9


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box [x0,x1] x [y0,y1] x [z0,z1]."""

    x0: float
    y0: float
    z0: float
    x1: float
    y1: float
    z1: float

    @classmethod
    def from_base(cls, x: float, z: float, y: float, w: float, d: float, h: float) -> "Box":
        """Box of footprint w (x) by d (z) by h (y), centered at (x, z), base at height y."""
        return cls(x - w / 2, y, z - d / 2, x + w / 2, y + h, z + d / 2)

    @property
    def center(self) -> tuple[float, float, float]:
        return ((self.x0 + self.x1) / 2, (self.y0 + self.y1) / 2, (self.z0 + self.z1) / 2)

    def inflated_xz(self, r: float) -> "Box":
        return Box(self.x0 - r, self.y0, self.z0 - r, self.x1 + r, self.y1, self.z1 + r)

    def contains_xz(self, x: float, z: float) -> bool:
        return self.x0 <= x <= self.x1 and self.z0 <= z <= self.z1

    def overlaps(self, other: "Box") -> bool:
        """Open-interval overlap in all three axes (touching faces do not overlap)."""
        return (
            self.x0 < other.x1 - EPS
            and other.x0 < self.x1 - EPS
            and self.z0 < other.z1 - EPS
            and other.z0 < self.z1 - EPS
            and self.y0 < other.y1 - EPS
            and other.y0 < self.y1 - EPS
        )

    def overlaps_xz(self, other: "Box") -> bool:
        return (
            self.x0 < other.x1 - EPS
            and other.x0 < self.x1 - EPS
            and self.z0 < other.z1 - EPS
            and other.z0 < self.z1 - EPS
        )


def heading_vector(yaw_deg: float) -> tuple[float, float]:
    """Floor-projected unit heading (dx, dz) for a yaw in degrees."""
    r = math.radians(yaw_deg)
    return math.sin(r), math.cos(r)


def view_direction(yaw_deg: float, pitch_deg: float) -> tuple[float, float, float]:
    """Unit view direction; pitch positive looks downward."""
    y = math.radians(yaw_deg)
    p = math.radians(pitch_deg)
    return math.sin(y) * math.cos(p), -math.sin(p), math.cos(y) * math.cos(p)


def direction_to_angles(dx: float, dy: float, dz: float) -> tuple[float, float]:
    """Inverse of view_direction: (yaw, pitch) in degrees, yaw in [0, 360)."""
    n = math.sqrt(dx * dx + dy * dy + dz * dz)
    if n < EPS:
        raise ValueError("zero direction")
    yaw = math.degrees(math.atan2(dx, dz)) % 360.0
    pitch = math.degrees(math.asin(max(-1.0, min(1.0, -dy / n))))
    return yaw, pitch


def ray_box_intersect(
    origin: tuple[float, float, float],
    direction: tuple[float, float, float],
    box: Box,
) -> float | None:
    """Smallest t >= 0 with origin + t*direction inside the box, or None.

    Slab method; direction need not be normalized (t is in direction units).
    """
    tmin, tmax = 0.0, math.inf
    for o, d, lo, hi in (
        (origin[0], direction[0], box.x0, box.x1),
        (origin[1], direction[1], box.y0, box.y1),
        (origin[2], direction[2], box.z0, box.z1),
    ):
        if abs(d) < EPS:
            if o < lo or o > hi:
                return None
            continue
        t1, t2 = (lo - o) / d, (hi - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
        if tmin > tmax:
            return None
    return tmin


def ray_box_exit(
    origin: tuple[float, float, float],
    direction: tuple[float, float, float],
    box: Box,
) -> tuple[float, str] | None:
    """Exit distance and face name for a ray starting inside the box.

    Faces: x0/x1/y0/y1/z0/z1.  Returns None when the ray never leaves
    (cannot happen for a real direction).
    """
    best_t, best_face = math.inf, ""
    for o, d, lo, hi, flo, fhi in (
        (origin[0], direction[0], box.x0, box.x1, "x0", "x1"),
        (origin[1], direction[1], box.y0, box.y1, "y0", "y1"),
        (origin[2], direction[2], box.z0, box.z1, "z0", "z1"),
    ):
        if abs(d) < EPS:
            continue
        t = ((hi if d > 0 else lo) - o) / d
        if 0 <= t < best_t:
            best_t, best_face = t, fhi if d > 0 else flo
    if not math.isfinite(best_t):
        return None
    return best_t, best_face


def max_free_advance(
    x: float,
    z: float,
    dx: float,
    dz: float,
    distance: float,
    obstacles_xz: list[Box],
    room_w: float,
    room_d: float,
    radius: float,
) -> float:
    """How far a disc of the given radius can slide from (x, z) along (dx, dz).

    Obstacles and walls are inflated by the radius; motion stops exactly at
    first contact.  (dx, dz) must be a unit vector; distance >= 0.
    """
    limit = distance
    # Room shell: keep the disc center inside [radius, dim - radius].
    for o, d, lo, hi in ((x, dx, radius, room_w - radius), (z, dz, radius, room_d - radius)):
        if abs(d) < EPS:
            continue
        t = ((hi if d > 0 else lo) - o) / d
        if t < limit:
            limit = max(0.0, t)
    for box in obstacles_xz:
        g = box.inflated_xz(radius)
        if g.contains_xz(x, z):
            # Already in contact (tangent start); forbid moving deeper.
            t = _escape_or_zero(x, z, dx, dz, g)
            if t is not None and t < limit:
                limit = max(0.0, t)
            continue
        t = _entry_t_xz(x, z, dx, dz, g)
        if t is not None and t < limit:
            limit = max(0.0, t)
    return limit


def _entry_t_xz(x: float, z: float, dx: float, dz: float, box: Box) -> float | None:
    tmin, tmax = 0.0, math.inf
    for o, d, lo, hi in ((x, dx, box.x0, box.x1), (z, dz, box.z0, box.z1)):
        if abs(d) < EPS:
            if o < lo or o > hi:
                return None
            continue
        t1, t2 = (lo - o) / d, (hi - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        tmin = max(tmin, t1)
        tmax = min(tmax, t2)
        if tmin > tmax:
            return None
    return tmin


def _escape_or_zero(x: float, z: float, dx: float, dz: float, box: Box) -> float | None:
    """Starting on/inside an inflated box: 0 if moving inward, None if moving out."""
    cx, _, cz = box.center
    inward = dx * (cx - x) + dz * (cz - z)
    return 0.0 if inward > 0 else None


def segment_clear(
    ax: float,
    az: float,
    bx: float,
    bz: float,
    obstacles_xz: list[Box],
    room_w: float,
    room_d: float,
    radius: float,
) -> bool:
    """True when a disc can slide from a to b without any contact."""
    dist = math.hypot(bx - ax, bz - az)
    if dist < EPS:
        return True
    dx, dz = (bx - ax) / dist, (bz - az) / dist
    free = max_free_advance(ax, az, dx, dz, dist, obstacles_xz, room_w, room_d, radius)
    return free >= dist - 1e-6
