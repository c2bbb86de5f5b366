"""First-person software raycaster: frames, center-dot picking, look_at mapping.

Flat colors per object with distance shading, no textures or text; note
contents travel through the read action, never through pixels.  The pick ray
goes through the exact image center, so picking is resolution independent;
the renderer samples that same exact ray for the center pixel, which keeps
the dot pixel and the pick result in agreement by construction.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from PIL import Image

from .catalog import PROP_COLORS, SHELL_COLORS, entry
from .geometry import Box, ray_box_exit, ray_box_intersect, view_direction
from .pose import EYE_HEIGHT, AgentPose
from .scene import Placement, Room

if TYPE_CHECKING:
    from .world import WorldState

DEFAULT_VFOV = 60.0
DEFAULT_IMAGE_SIZE = (512, 512)
CENTER_DOT_RADIUS = 4
SHADE_FALLOFF = 20.0  # meters to darkest shade
SHADE_FLOOR = 0.35


@dataclass(frozen=True)
class Camera:
    pose: AgentPose
    vertical_fov: float = DEFAULT_VFOV
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE

    def __post_init__(self) -> None:
        if not (10.0 < self.vertical_fov < 120.0):
            raise ValueError("vertical_fov must be within (10, 120)")

    @property
    def tan_half(self) -> tuple[float, float]:
        """(horizontal, vertical) frustum half-extent tangents; square pixels."""
        w, h = self.image_size
        tv = math.tan(math.radians(self.vertical_fov) / 2)
        return tv * (w / h), tv

    def basis(self) -> tuple[tuple[float, float, float], ...]:
        """(forward, right, up) unit vectors for the current pose."""
        yaw, pitch = self.pose.yaw, self.pose.pitch
        f = view_direction(yaw, pitch)
        ry = math.radians(yaw)
        r = (math.cos(ry), 0.0, -math.sin(ry))
        rp = math.radians(pitch)
        u = (math.sin(rp) * math.sin(ry), math.cos(rp), math.sin(rp) * math.cos(ry))
        return f, r, u

    def eye(self) -> tuple[float, float, float]:
        return (self.pose.x, EYE_HEIGHT, self.pose.z)

    def ray(self, u: float, v: float) -> tuple[float, float, float]:
        """World direction through normalized image point (u, v), (0,0) top-left."""
        f, r, up = self.basis()
        th, tv = self.tan_half
        a = (2.0 * u - 1.0) * th
        b = (1.0 - 2.0 * v) * tv
        d = (
            f[0] + a * r[0] + b * up[0],
            f[1] + a * r[1] + b * up[1],
            f[2] + a * r[2] + b * up[2],
        )
        n = math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
        return (d[0] / n, d[1] / n, d[2] / n)


@dataclass
class Frame:
    pixels: np.ndarray  # (H, W, 3) uint8
    center_dot: bool = True
    annotations: dict | None = None  # debug only; never sent to agents

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, "RGB").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        Image.fromarray(self.pixels, "RGB").save(path, format="PNG")


@dataclass(frozen=True)
class PickResult:
    instance_id: str
    object_ref: str
    role: str  # "prop" | "exit" | "entrance" | "decoy"
    distance: float


def _placement_color(room: Room, p: Placement) -> tuple[int, int, int]:
    if p.role == "exit":
        return PROP_COLORS["exit_door"]
    if p.role == "entrance":
        return PROP_COLORS["entrance_door"]
    if p.role == "prop":
        kind = room.chain.node(p.object_ref).kind
        return PROP_COLORS.get(kind.value, (200, 60, 200))
    return entry(p.object_ref).color


def visible_placements(state: "WorldState") -> list[Placement]:
    room = state.scene.rooms[state.current_room]
    return [p for p in room.placements if p.instance_id not in state.removed_instances]


def look_at_to_angles(camera: Camera, u: float, v: float) -> tuple[float, float]:
    """Yaw/pitch that center the ray through image point (u, v).

    (0.5, 0.5) is an exact no-op.  Pitch is clamped to [-90, 90].
    """
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("look_at coordinates must be within [0, 1]")
    if u == 0.5 and v == 0.5:
        return camera.pose.yaw, camera.pose.pitch
    dx, dy, dz = camera.ray(u, v)
    horiz = math.hypot(dx, dz)
    if horiz < 1e-12:
        # straight up/down: yaw is ill-defined, keep the current one
        return camera.pose.yaw, 90.0 if dy < 0 else -90.0
    yaw = math.degrees(math.atan2(dx, dz)) % 360.0
    pitch = math.degrees(math.atan2(-dy, horiz))
    return yaw, max(-90.0, min(90.0, pitch))


def project_point(camera: Camera, point: tuple[float, float, float]) -> tuple[float, float] | None:
    """Normalized image coordinates of a world point, or None if behind the eye."""
    ex, ey, ez = camera.eye()
    vx, vy, vz = point[0] - ex, point[1] - ey, point[2] - ez
    f, r, up = camera.basis()
    zc = vx * f[0] + vy * f[1] + vz * f[2]
    if zc <= 1e-9:
        return None
    xc = vx * r[0] + vy * r[1] + vz * r[2]
    yc = vx * up[0] + vy * up[1] + vz * up[2]
    th, tv = camera.tan_half
    u = (xc / zc / th + 1.0) / 2.0
    v = (1.0 - yc / zc / tv) / 2.0
    return u, v


def center_ray_pick(state: "WorldState", camera: Camera | None = None) -> PickResult | None:
    """Nearest object on the exact center ray, or None when only shell is hit."""
    camera = camera or Camera(state.pose)
    eye = camera.eye()
    direction = camera.ray(0.5, 0.5)
    best: PickResult | None = None
    room = state.scene.rooms[state.current_room]
    for p in visible_placements(state):
        t = ray_box_intersect(eye, direction, p.box())
        if t is not None and (best is None or t < best.distance):
            best = PickResult(p.instance_id, p.object_ref, p.role, t)
    if best is None:
        return None
    shell = ray_box_exit(eye, direction, Box(0, 0, 0, room.width, room.wall_height, room.depth))
    if shell is not None and shell[0] < best.distance - 1e-9:
        return None
    return best


def render_frame(state: "WorldState", camera: Camera | None = None, annotate: bool = False) -> Frame:
    """Per-pixel nearest ray/box intersection over shell and placements."""
    camera = camera or Camera(state.pose)
    w, h = camera.image_size
    room = state.scene.rooms[state.current_room]
    placements = visible_placements(state)

    f, r, up = camera.basis()
    th, tv = camera.tan_half
    us = (np.arange(w) + 0.5) / w
    vs = (np.arange(h) + 0.5) / h
    # the dot pixel samples the exact center ray (matches center_ray_pick)
    us[w // 2] = 0.5
    vs[h // 2] = 0.5
    a = (2.0 * us - 1.0) * th
    b = (1.0 - 2.0 * vs) * tv
    dirs = (
        np.array(f)[None, None, :]
        + a[None, :, None] * np.array(r)[None, None, :]
        + b[:, None, None] * np.array(up)[None, None, :]
    )
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    eye = np.array(camera.eye())

    # room shell: exit distance of each ray from the inner box, face-classified
    shell_box = np.array([[0.0, 0.0, 0.0], [room.width, room.wall_height, room.depth]])
    with np.errstate(divide="ignore", invalid="ignore"):
        t_axis = np.where(
            dirs > 0,
            (shell_box[1][None, None, :] - eye[None, None, :]) / dirs,
            (shell_box[0][None, None, :] - eye[None, None, :]) / dirs,
        )
    t_axis = np.where(np.abs(dirs) < 1e-12, np.inf, t_axis)
    shell_t = t_axis.min(axis=2)
    shell_axis = t_axis.argmin(axis=2)

    shell_rgb = np.empty((h, w, 3), dtype=np.float64)
    wall = np.array(SHELL_COLORS["wall"], dtype=np.float64)
    floor = np.array(SHELL_COLORS["floor"], dtype=np.float64)
    ceiling = np.array(SHELL_COLORS["ceiling"], dtype=np.float64)
    shell_rgb[:] = wall
    vertical = shell_axis == 1
    shell_rgb[vertical & (dirs[:, :, 1] < 0)] = floor
    shell_rgb[vertical & (dirs[:, :, 1] > 0)] = ceiling

    best_t = shell_t.copy()
    best_rgb = shell_rgb
    hit_index = np.full((h, w), -1, dtype=np.int32)

    for idx, p in enumerate(placements):
        box = p.box()
        lo = np.array([box.x0, box.y0, box.z0])
        hi = np.array([box.x1, box.y1, box.z1])
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo[None, None, :] - eye[None, None, :]) / dirs
            t2 = (hi[None, None, :] - eye[None, None, :]) / dirs
        near = np.minimum(t1, t2)
        far = np.maximum(t1, t2)
        parallel = np.abs(dirs) < 1e-12
        inside = (eye[None, None, :] >= lo[None, None, :]) & (eye[None, None, :] <= hi[None, None, :])
        near = np.where(parallel, np.where(inside, -np.inf, np.inf), near)
        far = np.where(parallel, np.where(inside, np.inf, -np.inf), far)
        tmin = np.maximum(near.max(axis=2), 0.0)
        tmax = far.min(axis=2)
        hit = (tmin <= tmax) & (tmin < best_t)
        if not hit.any():
            continue
        color = np.array(_placement_color(room, p), dtype=np.float64)
        best_rgb = np.where(hit[:, :, None], color[None, None, :], best_rgb)
        best_t = np.where(hit, tmin, best_t)
        hit_index = np.where(hit, idx, hit_index)

    shade = np.clip(1.0 - best_t / SHADE_FALLOFF, SHADE_FLOOR, 1.0)
    pixels = np.clip(best_rgb * shade[:, :, None], 0, 255).astype(np.uint8)

    # center red dot
    cy, cx = h // 2, w // 2
    yy, xx = np.ogrid[:h, :w]
    dot = (yy - cy) ** 2 + (xx - cx) ** 2 <= CENTER_DOT_RADIUS**2
    pixels[dot] = (255, 0, 0)

    annotations = None
    if annotate:
        annotations = {
            "hit_instance_ids": [p.instance_id for p in placements],
            "hit_index": hit_index,
            "hit_distance": best_t,
        }
    return Frame(pixels=pixels, center_dot=True, annotations=annotations)
