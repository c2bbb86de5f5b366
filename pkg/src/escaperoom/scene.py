"""Room scene generation, multi-room composition, and the scene file format.

A scene is one or two rectangular rooms, each dressed with style-consistent
decoy furniture and the physical props of its chain, plus an agent start pose,
a step budget, and the background story.  Generation is deterministic in
(difficulty, style, seed) and only returns scenes the oracle can solve.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace

from . import catalog
from .catalog import DOOR_SIZE, PROP_SIZES, STYLES, entries_for_style, entry
from .chain import (
    Difficulty,
    NodeKind,
    PropChain,
    PropNode,
    UnlockMethod,
    ValidationReport,
    build_difficulty_chain,
    rename_nodes,
    validate_chain,
)
from .geometry import Box
from .stories import fragments, pick_story

FORMAT_VERSION = 1
WALL_HEIGHT = 3.0
MIN_ROOM_SIDE = 6.0
MAX_ROOM_SIDE = 10.0
DOOR_CLEARANCE = 1.0  # free meters in front of every door
PLACE_ATTEMPTS = 200
LAYOUT_ATTEMPTS = 10

STEP_LIMITS = {
    Difficulty.D1: 50,
    Difficulty.D2: 75,
    Difficulty.D2_KEY: 75,
    Difficulty.D2_PASSWORD: 75,
    Difficulty.D3_NOTE_KEY: 100,
    Difficulty.D3_KEY_NOTE: 100,
}
MULTIROOM_STEP_LIMIT = 80
STANDARD_STEP_LIMITS = (50, 75, 100, 80)

DECOY_TARGETS = {
    Difficulty.D1: 20,
    Difficulty.D2: 15,
    Difficulty.D2_KEY: 15,
    Difficulty.D2_PASSWORD: 15,
    Difficulty.D3_NOTE_KEY: 15,
    Difficulty.D3_KEY_NOTE: 15,
}


class SceneError(Exception):
    """Scene cannot be generated, composed, or loaded."""


class SceneFormatError(SceneError):
    """A scene file violates the format or its invariants."""


@dataclass(frozen=True)
class Placement:
    """One object in a room: a decoy, a prop, or a door.

    The bounding box is axis-aligned; yaw is restricted to multiples of 90
    degrees and (w, d) are stored already swapped so the box stays exact.
    """

    instance_id: str
    object_ref: str  # catalog name for decoys, chain node id for props/exit
    role: str  # "decoy" | "prop" | "exit" | "entrance"
    x: float
    z: float
    y: float
    yaw: float
    w: float
    d: float
    h: float

    def box(self) -> Box:
        return Box.from_base(self.x, self.z, self.y, self.w, self.d, self.h)


@dataclass(frozen=True)
class AgentStart:
    x: float
    z: float
    yaw: float
    pitch: float = 0.0


@dataclass(frozen=True)
class Room:
    width: float
    depth: float
    wall_height: float
    style: str
    chain: PropChain
    placements: tuple[Placement, ...]

    def doors(self) -> list[Placement]:
        return [p for p in self.placements if p.role in ("exit", "entrance")]

    def exit_door(self) -> Placement:
        for p in self.placements:
            if p.role == "exit":
                return p
        raise SceneError("room has no exit door")


@dataclass(frozen=True)
class SceneConfig:
    scene_id: str
    difficulty: str
    seed: int
    step_limit: int
    story_text: str
    agent_start: AgentStart
    rooms: tuple[Room, ...]
    format_version: int = FORMAT_VERSION

    @property
    def chains(self) -> list[PropChain]:
        return [r.chain for r in self.rooms]


# ---------------------------------------------------------------------------
# generation


def _round3(v: float) -> float:
    return round(v, 3)


def _splice_story(chain: PropChain, style: str, rng: random.Random) -> tuple[PropChain, str]:
    """Attach story fragments to the chain's notes; returns (chain, full story)."""
    story = pick_story(style, rng)
    frags = fragments(story)
    papers = [n for n in chain.nodes if n.kind is NodeKind.PAPER]
    if not papers:
        return chain, story.text
    cut = max(1, len(frags) // max(1, len(papers)))
    nodes = list(chain.nodes)
    for i, paper in enumerate(papers):
        lo = i * cut
        hi = len(frags) if i == len(papers) - 1 else (i + 1) * cut
        piece = " ".join(frags[lo:hi])
        detail = f"{piece} {paper.detail_text}".strip() if paper.detail_text else piece
        nodes[nodes.index(paper)] = replace(paper, detail_text=detail)
    return PropChain(tuple(nodes), chain.difficulty_label), story.text


def _door_placement(instance_id: str, role: str, wall: str, offset: float, w: float, d: float) -> Placement:
    dw, dd, dh = DOOR_SIZE
    if wall == "s":
        return Placement(instance_id, instance_id, role, offset, dd / 2, 0.0, 0.0, dw, dd, dh)
    if wall == "n":
        return Placement(instance_id, instance_id, role, offset, d - dd / 2, 0.0, 180.0, dw, dd, dh)
    if wall == "w":
        return Placement(instance_id, instance_id, role, dd / 2, offset, 0.0, 90.0, dd, dw, dh)
    if wall == "e":
        return Placement(instance_id, instance_id, role, w - dd / 2, offset, 0.0, 270.0, dd, dw, dh)
    raise ValueError(wall)


def _door_clear_zone(p: Placement, room_w: float, room_d: float) -> Box:
    """Rectangle in front of a door that must stay free of furniture."""
    b = p.box()
    pad = 0.2
    if b.z0 <= 0.2:  # south wall, opens toward +z
        return Box(b.x0 - pad, 0, b.z1, b.x1 + pad, WALL_HEIGHT, b.z1 + DOOR_CLEARANCE)
    if b.z1 >= room_d - 0.2:
        return Box(b.x0 - pad, 0, b.z0 - DOOR_CLEARANCE, b.x1 + pad, WALL_HEIGHT, b.z0)
    if b.x0 <= 0.2:
        return Box(b.x1, 0, b.z0 - pad, b.x1 + DOOR_CLEARANCE, WALL_HEIGHT, b.z1 + pad)
    return Box(b.x0 - DOOR_CLEARANCE, 0, b.z0 - pad, b.x0, WALL_HEIGHT, b.z1 + pad)


def _overlaps_any(box: Box, existing: list[Placement], zones: list[Box]) -> bool:
    if any(box.overlaps(p.box()) for p in existing):
        return True
    return any(box.overlaps_xz(z) for z in zones)


def _place_decoys(
    rng: random.Random,
    style: str,
    count: int,
    room_w: float,
    room_d: float,
    existing: list[Placement],
    zones: list[Box],
) -> list[Placement]:
    pool = entries_for_style(style)
    picks = sorted(
        (rng.choice(pool) for _ in range(count)),
        key=lambda e: e.size[0] * e.size[1],
        reverse=True,
    )
    placed: list[Placement] = []
    for i, e in enumerate(picks):
        ew, ed, eh = e.size
        ok = None
        for _ in range(PLACE_ATTEMPTS):
            yaw = rng.choice((0.0, 90.0, 180.0, 270.0))
            w, d = (ew, ed) if yaw in (0.0, 180.0) else (ed, ew)
            if rng.random() < 0.65:
                # wall-adjacent: flush against a random wall
                wall = rng.choice("nsew")
                gap = 0.05
                if wall == "s":
                    x, z = rng.uniform(w / 2, room_w - w / 2), d / 2 + gap
                elif wall == "n":
                    x, z = rng.uniform(w / 2, room_w - w / 2), room_d - d / 2 - gap
                elif wall == "w":
                    x, z = w / 2 + gap, rng.uniform(d / 2, room_d - d / 2)
                else:
                    x, z = room_w - w / 2 - gap, rng.uniform(d / 2, room_d - d / 2)
            else:
                x = rng.uniform(w / 2 + 0.05, room_w - w / 2 - 0.05)
                z = rng.uniform(d / 2 + 0.05, room_d - d / 2 - 0.05)
            x, z = _round3(x), _round3(z)
            cand = Placement(f"{e.name}#{len(existing) + i}", e.name, "decoy", x, z, 0.0, yaw, w, d, eh)
            if not _overlaps_any(cand.box(), existing + placed, zones):
                ok = cand
                break
        if ok is not None:
            placed.append(ok)
        # an unplaceable decoy is skipped; props and doors must never be
    return placed


def _surface_hosts(placed: list[Placement]) -> list[Placement]:
    hosts = []
    for p in placed:
        if p.role != "decoy":
            continue
        e = entry(p.object_ref)
        if e.surface_height is not None:
            hosts.append(p)
    return hosts


def _place_prop(
    rng: random.Random,
    node: PropNode,
    room_w: float,
    room_d: float,
    existing: list[Placement],
    zones: list[Box],
) -> Placement:
    w, d, h = PROP_SIZES[node.kind.value]
    hosts = _surface_hosts(existing)
    rng.shuffle(hosts)
    for host in hosts:
        hb = host.box()
        if hb.x1 - hb.x0 < w + 0.1 or hb.z1 - hb.z0 < d + 0.1:
            continue
        for _ in range(40):
            x = _round3(rng.uniform(hb.x0 + w / 2 + 0.05, hb.x1 - w / 2 - 0.05))
            z = _round3(rng.uniform(hb.z0 + d / 2 + 0.05, hb.z1 - d / 2 - 0.05))
            y = entry(host.object_ref).surface_height or 0.0
            cand = Placement(node.id, node.id, "prop", x, z, _round3(host.y + y), 0.0, w, d, h)
            if not any(cand.box().overlaps(p.box()) for p in existing):
                return cand
    # floor fallback
    for _ in range(PLACE_ATTEMPTS):
        x = _round3(rng.uniform(w / 2 + 0.3, room_w - w / 2 - 0.3))
        z = _round3(rng.uniform(d / 2 + 0.3, room_d - d / 2 - 0.3))
        cand = Placement(node.id, node.id, "prop", x, z, 0.0, 0.0, w, d, h)
        if not _overlaps_any(cand.box(), existing, zones):
            return cand
    raise SceneError(f"could not place prop {node.id}")


def _pick_agent_start(
    rng: random.Random, room_w: float, room_d: float, placements: list[Placement]
) -> AgentStart:
    from .pose import AGENT_RADIUS

    margin = AGENT_RADIUS + 0.15
    for _ in range(PLACE_ATTEMPTS):
        x = _round3(rng.uniform(margin, room_w - margin))
        z = _round3(rng.uniform(margin, room_d - margin))
        if any(p.box().inflated_xz(margin).contains_xz(x, z) for p in placements):
            continue
        return AgentStart(x, z, _round3(rng.uniform(0, 360)), 0.0)
    raise SceneError("could not place the agent start pose")


def _generate_room(rng: random.Random, difficulty: Difficulty, style: str) -> tuple[Room, str]:
    width = _round3(rng.uniform(MIN_ROOM_SIDE, MAX_ROOM_SIDE))
    depth = _round3(rng.uniform(MIN_ROOM_SIDE, MAX_ROOM_SIDE))
    chain = build_difficulty_chain(difficulty, rng.randrange(2**31))
    chain, story_text = _splice_story(chain, style, rng)

    wall = rng.choice("nsew")
    extent = width if wall in "ns" else depth
    offset = _round3(rng.uniform(DOOR_SIZE[0] / 2 + 0.5, extent - DOOR_SIZE[0] / 2 - 0.5))
    exit_door = _door_placement(chain.exit_node.id, "exit", wall, offset, width, depth)

    placements: list[Placement] = [exit_door]
    zones = [_door_clear_zone(exit_door, width, depth)]

    target = DECOY_TARGETS[difficulty] + rng.randint(-3, 3)
    placements += _place_decoys(rng, style, target, width, depth, placements, zones)

    for node in chain.shown_nodes():
        if node.kind is NodeKind.EXIT:
            continue
        placements.append(_place_prop(rng, node, width, depth, placements, zones))

    room = Room(width, depth, WALL_HEIGHT, style, chain, tuple(placements))
    return room, story_text


def generate_scene(difficulty: Difficulty | str, style: str, seed: int) -> SceneConfig:
    """Generate a single-room scene; deterministic in its arguments.

    Raises SceneError when no solvable layout is found within the retry
    budget (in practice a pathological seed); callers retry with a new seed.
    """
    difficulty = Difficulty(difficulty)
    if difficulty not in STEP_LIMITS:
        raise ValueError(f"not a standard difficulty: {difficulty}")
    if style not in STYLES:
        raise ValueError(f"unknown style {style!r}")

    last_error = "no layout attempt succeeded"
    for attempt in range(LAYOUT_ATTEMPTS):
        rng = random.Random(repr(("scene", difficulty.value, style, seed, attempt)))
        try:
            room, story_text = _generate_room(rng, difficulty, style)
            start = _pick_agent_start(rng, room.width, room.depth, list(room.placements))
        except SceneError as e:
            last_error = str(e)
            continue
        config = SceneConfig(
            scene_id=f"{difficulty.value}-{style}-{seed:04d}",
            difficulty=difficulty.value,
            seed=seed,
            step_limit=STEP_LIMITS[difficulty],
            story_text=story_text,
            agent_start=start,
            rooms=(room,),
        )
        report = validate_solvable(config)
        if report.ok:
            return config
        last_error = "; ".join(report.violations) or "oracle could not escape"
    raise SceneError(f"scene generation failed for seed {seed}: {last_error}")


def compose_multiroom(first: SceneConfig, second: SceneConfig) -> SceneConfig:
    """Join two single-room scenes: escaping room 1 leads into room 2.

    Node ids get per-room suffixes so credentials cannot cross rooms; room 2
    gains an entrance door on the wall shared with room 1's exit.
    """
    if len(first.rooms) != 1 or len(second.rooms) != 1:
        raise SceneError("compose_multiroom takes single-room scenes")

    r1, r2 = first.rooms[0], second.rooms[0]
    rooms = []
    for idx, room in enumerate((r1, r2), start=1):
        mapping = {n.id: f"{n.id}_r{idx}" for n in room.chain.nodes}
        chain = rename_nodes(room.chain, mapping)
        placements = tuple(
            replace(p, instance_id=mapping.get(p.instance_id, p.instance_id), object_ref=mapping.get(p.object_ref, p.object_ref))
            if p.role in ("prop", "exit")
            else p
            for p in room.placements
        )
        rooms.append(Room(room.width, room.depth, room.wall_height, room.style, chain, placements))

    exit_wall = _wall_of(r1.exit_door(), r1.width, r1.depth)
    preferred_wall = {"n": "s", "s": "n", "e": "w", "w": "e"}[exit_wall]
    room2 = rooms[1]
    # rooms live in local coordinates; the wall that can host the entrance
    # becomes the shared wall (preferring the one opposite room 1's exit)
    entrance = None
    last_err: SceneError | None = None
    for wall in dict.fromkeys((preferred_wall, "n", "e", "s", "w")):
        try:
            entrance = _fit_entrance(room2, wall, _door_offset(r1.exit_door(), exit_wall))
            break
        except SceneError as e:
            last_err = e
    if entrance is None:
        raise last_err or SceneError("no shared wall segment fits the entrance door")
    rooms[1] = Room(
        room2.width,
        room2.depth,
        room2.wall_height,
        room2.style,
        room2.chain,
        room2.placements + (entrance,),
    )

    return SceneConfig(
        scene_id=f"multi({first.scene_id}+{second.scene_id})",
        difficulty=f"{first.difficulty}+{second.difficulty}",
        seed=first.seed,
        step_limit=MULTIROOM_STEP_LIMIT,
        story_text=first.story_text + "\n\n" + second.story_text,
        agent_start=first.agent_start,
        rooms=tuple(rooms),
    )


#: The three standard two-room combinations.
MULTIROOM_COMBOS = (("d1", "d1"), ("d1", "d2"), ("d2", "d2"))


def generate_multiroom(
    first_difficulty: Difficulty | str, second_difficulty: Difficulty | str, style: str, seed: int
) -> SceneConfig:
    """Deterministic solvable two-room game for a combination label.

    Sub-seeds and the second room's style derive from the seed; unsolvable
    draws are retried within a fixed budget, keeping determinism.
    """
    d1, d2 = Difficulty(first_difficulty), Difficulty(second_difficulty)
    for attempt in range(LAYOUT_ATTEMPTS):
        rng = random.Random(repr(("multi", d1.value, d2.value, style, seed, attempt)))
        sub1, sub2 = rng.randrange(10**6), rng.randrange(10**6)
        second_style = rng.choice(STYLES)
        try:
            first = generate_scene(d1, style, sub1)
            second = generate_scene(d2, second_style, sub2)
            combined = compose_multiroom(first, second)
        except SceneError:
            continue
        combined = replace(
            combined,
            scene_id=f"{d1.value}+{d2.value}-{style}-{seed:04d}",
            difficulty=f"{d1.value}+{d2.value}",
            seed=seed,
        )
        report = validate_solvable(combined)
        if report.ok:
            return combined
    raise SceneError(f"multi-room generation failed for seed {seed}")


def _wall_of(door: Placement, room_w: float, room_d: float) -> str:
    b = door.box()
    if b.z0 <= 0.2:
        return "s"
    if b.z1 >= room_d - 0.2:
        return "n"
    if b.x0 <= 0.2:
        return "w"
    return "e"


def _door_offset(door: Placement, wall: str) -> float:
    return door.x if wall in "ns" else door.z


ENTRANCE_STANDOFF = 0.7  # meters inside the room, where the agent appears


def entrance_spawn_point(entrance: Placement, room: Room) -> tuple[float, float]:
    """Where the agent stands right after coming through the entrance door."""
    b = entrance.box()
    cx, cz = (b.x0 + b.x1) / 2, (b.z0 + b.z1) / 2
    if b.z0 <= 0.2:
        return cx, b.z1 + ENTRANCE_STANDOFF
    if b.z1 >= room.depth - 0.2:
        return cx, b.z0 - ENTRANCE_STANDOFF
    if b.x0 <= 0.2:
        return b.x1 + ENTRANCE_STANDOFF, cz
    return b.x0 - ENTRANCE_STANDOFF, cz


def _fit_entrance(room: Room, wall: str, preferred: float) -> Placement:
    """Entrance position on the shared wall whose spawn point can reach the exit."""
    from .planner import build_room_grid, goal_cells_for_room, reachable_component

    extent = room.width if wall in "ns" else room.depth
    half = DOOR_SIZE[0] / 2 + 0.5
    lo, hi = half, extent - half
    if lo > hi:
        raise SceneError("no shared wall segment fits the entrance door")
    grid = build_room_grid(room)
    exit_goals = goal_cells_for_room(room, frozenset(), grid, room.exit_door())
    component = reachable_component(grid, exit_goals)
    candidates = [min(max(preferred, lo), hi)]
    candidates += [lo + k * 0.25 for k in range(int((hi - lo) / 0.25) + 1)]
    existing = list(room.placements)
    for off in candidates:
        cand = _door_placement("entrance", "entrance", wall, _round3(off), room.width, room.depth)
        zone = _door_clear_zone(cand, room.width, room.depth)
        if _overlaps_any(cand.box(), existing, []):
            continue
        if any(zone.overlaps_xz(p.box()) for p in existing):
            continue
        spawn = entrance_spawn_point(cand, room)
        cell = grid.cell_of(*spawn)
        if grid.free[cell[0]][cell[1]] and cell in component:
            return cand
    raise SceneError("no shared wall segment fits the entrance door")


def validate_solvable(config: SceneConfig) -> ValidationReport:
    """Solvability check: structural reachability plus a full oracle run."""
    violations: list[str] = []
    for room in config.rooms:
        rep = validate_chain(room.chain)
        violations += rep.violations
        placed = {p.object_ref for p in room.placements if p.role in ("prop", "exit")}
        for node in room.chain.shown_nodes():
            if node.id not in placed:
                violations.append(f"unreachable prerequisite {node.id}")
    if violations:
        return ValidationReport(False, violations)

    from .planner import plan_escape  # imported here: planner builds on world+scene

    try:
        plan = plan_escape(config)
    except Exception as e:  # noqa: BLE001 - planner failure is a validation outcome
        return ValidationReport(False, [f"oracle failed: {e}"])
    if not plan.escaped:
        return ValidationReport(False, [f"oracle did not escape: {plan.failure_reason}"])
    if plan.steps > config.step_limit:
        return ValidationReport(
            False, [f"oracle needed {plan.steps} steps, limit is {config.step_limit}"]
        )
    return ValidationReport(True, [], oracle_steps=plan.steps, oracle_path_length=plan.path_length)


# ---------------------------------------------------------------------------
# serialization

_UNLOCK_FMT = {"free": "free", "key": "key({})", "password": "password({})"}


def _unlock_to_str(u: UnlockMethod) -> str:
    return _UNLOCK_FMT[u.variant].format(u.required_id or "")


def _unlock_from_str(s: str) -> UnlockMethod:
    if s == "free":
        return UnlockMethod.free()
    for variant in ("key", "password"):
        if s.startswith(variant + "(") and s.endswith(")"):
            return UnlockMethod(variant, s[len(variant) + 1 : -1])
    raise SceneFormatError(f"bad unlock method {s!r}")


def _node_to_dict(n: PropNode) -> dict:
    return {
        "id": n.id,
        "kind": n.kind.value,
        "unlock": _unlock_to_str(n.unlock),
        "contents": list(n.contents),
        "show": n.show,
        "detail_text": n.detail_text,
    }


def _placement_to_dict(p: Placement) -> dict:
    return {
        "instance_id": p.instance_id,
        "object_ref": p.object_ref,
        "role": p.role,
        "x": p.x,
        "z": p.z,
        "y": p.y,
        "yaw": p.yaw,
        "w": p.w,
        "d": p.d,
        "h": p.h,
    }


def scene_to_dict(config: SceneConfig) -> dict:
    return {
        "format_version": config.format_version,
        "scene_id": config.scene_id,
        "difficulty": config.difficulty,
        "seed": config.seed,
        "step_limit": config.step_limit,
        "story_text": config.story_text,
        "agent_start": {
            "x": config.agent_start.x,
            "z": config.agent_start.z,
            "yaw": config.agent_start.yaw,
            "pitch": config.agent_start.pitch,
        },
        "rooms": [
            {
                "width": r.width,
                "depth": r.depth,
                "wall_height": r.wall_height,
                "style": r.style,
                "difficulty_label": r.chain.difficulty_label.value,
                "chain": [_node_to_dict(n) for n in r.chain.nodes],
                "placements": [_placement_to_dict(p) for p in r.placements],
            }
            for r in config.rooms
        ],
    }


def scene_to_json(config: SceneConfig) -> str:
    return json.dumps(scene_to_dict(config), indent=2) + "\n"


def save_scene(config: SceneConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(scene_to_json(config))


def _require_keys(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise SceneFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = allowed - set(obj)
    if missing:
        raise SceneFormatError(f"{where}: missing field(s) {sorted(missing)}")


def scene_from_dict(data: dict) -> SceneConfig:
    if not isinstance(data, dict):
        raise SceneFormatError("scene document must be an object")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise SceneFormatError(
            f"unsupported format_version {version!r}, this build reads version {FORMAT_VERSION}"
        )
    _require_keys(
        data,
        {
            "format_version",
            "scene_id",
            "difficulty",
            "seed",
            "step_limit",
            "story_text",
            "agent_start",
            "rooms",
        },
        "scene",
    )
    _require_keys(data["agent_start"], {"x", "z", "yaw", "pitch"}, "agent_start")
    rooms = []
    for ri, rd in enumerate(data["rooms"]):
        where = f"rooms[{ri}]"
        _require_keys(
            rd,
            {"width", "depth", "wall_height", "style", "difficulty_label", "chain", "placements"},
            where,
        )
        nodes = []
        for nd in rd["chain"]:
            _require_keys(nd, {"id", "kind", "unlock", "contents", "show", "detail_text"}, f"{where}.chain")
            nodes.append(
                PropNode(
                    nd["id"],
                    NodeKind(nd["kind"]),
                    _unlock_from_str(nd["unlock"]),
                    tuple(nd["contents"]),
                    bool(nd["show"]),
                    nd["detail_text"],
                )
            )
        chain = PropChain(tuple(nodes), Difficulty(rd["difficulty_label"]))
        placements = []
        for pd in rd["placements"]:
            _require_keys(
                pd,
                {"instance_id", "object_ref", "role", "x", "z", "y", "yaw", "w", "d", "h"},
                f"{where}.placements",
            )
            placements.append(Placement(**pd))
        rooms.append(
            Room(rd["width"], rd["depth"], rd["wall_height"], rd["style"], chain, tuple(placements))
        )
    config = SceneConfig(
        scene_id=data["scene_id"],
        difficulty=data["difficulty"],
        seed=data["seed"],
        step_limit=data["step_limit"],
        story_text=data["story_text"],
        agent_start=AgentStart(**data["agent_start"]),
        rooms=tuple(rooms),
        format_version=version,
    )
    _check_invariants(config)
    return config


_STANDARD_LABELS = {d.value for d in STEP_LIMITS}


def _check_invariants(config: SceneConfig) -> None:
    parts = config.difficulty.split("+")
    if all(p in _STANDARD_LABELS for p in parts):
        if config.step_limit not in STANDARD_STEP_LIMITS:
            raise SceneFormatError(
                f"standard games use step limits {STANDARD_STEP_LIMITS}, got {config.step_limit}"
            )
    for ri, room in enumerate(config.rooms):
        rep = validate_chain(room.chain)
        if not rep.ok:
            raise SceneFormatError(f"rooms[{ri}]: invalid chain: " + "; ".join(rep.violations))
        if room.width < 4 or room.depth < 4:
            raise SceneFormatError(f"rooms[{ri}]: sides must be at least 4 m")
        exits = [p for p in room.placements if p.role == "exit"]
        if len(exits) != 1:
            raise SceneFormatError(f"rooms[{ri}]: expected exactly one exit door, got {len(exits)}")
        entrances = [p for p in room.placements if p.role == "entrance"]
        if entrances and ri == 0:
            raise SceneFormatError("rooms[0]: first room must not have an entrance door")
        counts: dict[str, int] = {}
        for p in room.placements:
            if p.role in ("prop", "exit"):
                counts[p.object_ref] = counts.get(p.object_ref, 0) + 1
                if not room.chain.has_node(p.object_ref):
                    raise SceneFormatError(
                        f"rooms[{ri}]: placement references unknown chain node {p.object_ref!r}"
                    )
        for node in room.chain.shown_nodes():
            if counts.get(node.id, 0) != 1:
                raise SceneFormatError(
                    f"rooms[{ri}]: shown node {node.id!r} has {counts.get(node.id, 0)} placements, expected 1"
                )
    start = config.agent_start
    room0 = config.rooms[0]
    from .pose import AGENT_RADIUS

    if not (AGENT_RADIUS <= start.x <= room0.width - AGENT_RADIUS) or not (
        AGENT_RADIUS <= start.z <= room0.depth - AGENT_RADIUS
    ):
        raise SceneFormatError("agent_start outside the first room")
    for p in room0.placements:
        if p.box().inflated_xz(AGENT_RADIUS).contains_xz(start.x, start.z):
            raise SceneFormatError(f"agent_start collides with {p.instance_id}")


def scene_from_json(text: str) -> SceneConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    return scene_from_dict(data)


def load_scene(path) -> SceneConfig:
    with open(path, encoding="utf-8") as f:
        return scene_from_json(f.read())
