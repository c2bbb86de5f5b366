from __future__ import annotations

import math

import pytest

from escaperoom.catalog import DOOR_SIZE, PROP_SIZES
from escaperoom.chain import Difficulty, NodeKind, build_difficulty_chain
from escaperoom.scene import (
    WALL_HEIGHT,
    AgentStart,
    Placement,
    Room,
    SceneConfig,
    generate_scene,
)


def build_custom_scene(
    chain,
    width: float = 8.0,
    depth: float = 8.0,
    style: str = "bedroom",
    door_wall: str = "s",
    door_offset: float = 4.0,
    prop_positions: dict[str, tuple[float, float]] | None = None,
    decoys: list[Placement] | None = None,
    start: tuple[float, float, float, float] = (4.0, 6.0, 180.0, 0.0),
    step_limit: int = 50,
    scene_id: str = "custom-test",
) -> SceneConfig:
    """Hand-built scene with controlled geometry for unit tests."""
    dw, dd, dh = DOOR_SIZE
    exit_id = chain.exit_node.id
    if door_wall == "s":
        door = Placement(exit_id, exit_id, "exit", door_offset, dd / 2, 0.0, 0.0, dw, dd, dh)
    elif door_wall == "n":
        door = Placement(exit_id, exit_id, "exit", door_offset, depth - dd / 2, 0.0, 180.0, dw, dd, dh)
    elif door_wall == "w":
        door = Placement(exit_id, exit_id, "exit", dd / 2, door_offset, 0.0, 90.0, dd, dw, dh)
    else:
        door = Placement(exit_id, exit_id, "exit", width - dd / 2, door_offset, 0.0, 270.0, dd, dw, dh)
    placements = [door] + list(decoys or [])
    positions = dict(prop_positions or {})
    for node in chain.shown_nodes():
        if node.kind is NodeKind.EXIT:
            continue
        x, z = positions[node.id]
        w, d, h = PROP_SIZES[node.kind.value]
        placements.append(Placement(node.id, node.id, "prop", x, z, 0.0, 0.0, w, d, h))
    room = Room(width, depth, WALL_HEIGHT, style, chain, tuple(placements))
    return SceneConfig(
        scene_id=scene_id,
        difficulty=chain.difficulty_label.value,
        seed=0,
        step_limit=step_limit,
        story_text="A test story about this room.",
        agent_start=AgentStart(*start),
        rooms=(room,),
    )


@pytest.fixture()
def empty_d1_scene() -> SceneConfig:
    chain = build_difficulty_chain(Difficulty.D1, 0)
    return build_custom_scene(chain, start=(4.0, 6.0, 180.0, 0.0))


@pytest.fixture(scope="session")
def d1_scene() -> SceneConfig:
    return generate_scene("d1", "bedroom", 42)


@pytest.fixture(scope="session")
def d2_scene() -> SceneConfig:
    return generate_scene("d2-key", "kitchen", 11)


@pytest.fixture(scope="session")
def d2_password_scene() -> SceneConfig:
    return generate_scene("d2-password", "living_room", 5)


@pytest.fixture(scope="session")
def d3_scene() -> SceneConfig:
    return generate_scene("d3-note-key", "kitchen", 7)


# ---------------------------------------------------------------------------
# independent geometry oracles (deliberately scalar, separate from src code)


def slab_ray_box(origin, direction, lo, hi) -> float | None:
    """Textbook slab test; t of first entry, None on miss."""
    tmin, tmax = 0.0, math.inf
    for k in range(3):
        o, d = origin[k], direction[k]
        if abs(d) < 1e-12:
            if o < lo[k] or o > hi[k]:
                return None
            continue
        t1, t2 = (lo[k] - o) / d, (hi[k] - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        tmin, tmax = max(tmin, t1), min(tmax, t2)
        if tmin > tmax:
            return None
    return tmin


def brute_force_pick(state, direction):
    """Nearest placement on a ray from the eye; None when the shell is closer."""
    from escaperoom.pose import EYE_HEIGHT

    room = state.scene.rooms[state.current_room]
    eye = (state.pose.x, EYE_HEIGHT, state.pose.z)
    best = None
    for p in room.placements:
        if p.instance_id in state.removed_instances:
            continue
        b = p.box()
        t = slab_ray_box(eye, direction, (b.x0, b.y0, b.z0), (b.x1, b.y1, b.z1))
        if t is not None and (best is None or t < best[1]):
            best = (p.instance_id, t)
    if best is None:
        return None
    # shell exit: nearest positive boundary crossing of the inner room box
    exit_t = math.inf
    for k, (lo, hi) in enumerate(((0.0, room.width), (0.0, room.wall_height), (0.0, room.depth))):
        d = direction[k]
        if abs(d) < 1e-12:
            continue
        t = ((hi if d > 0 else lo) - eye[k]) / d
        if 0 <= t < exit_t:
            exit_t = t
    if exit_t < best[1] - 1e-9:
        return None
    return best
