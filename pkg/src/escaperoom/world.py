"""Episode state machine: actions in, feedback out.

Sub-actions of one message apply in a fixed order: rotate_right, rotate_down,
look_at (computed against the pre-step camera and overriding the rotations),
move_forward, jump (recorded, no effect), grab/interactions, read.  Every
step() call consumes exactly one step of the budget, including messages that
failed to parse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from . import prompts
from .actions import ActionParseError, AgentAction, parse_action
from .chain import NodeKind, PropNode
from .geometry import heading_vector, max_free_advance
from .pose import AGENT_RADIUS, GRAB_RANGE, AgentPose
from .render import Camera, center_ray_pick, look_at_to_angles
from .scene import Placement, SceneConfig

MOVE_REPORT_EPS = 0.01  # truncation below 1 cm is not reported

RUNNING, ESCAPED, FAILED = "running", "escaped", "failed"

KIND_WORD = {
    NodeKind.KEY: "key",
    NodeKind.PAPER: "note",
    NodeKind.BOX: "box",
    NodeKind.EXIT: "door",
    NodeKind.DOOR: "door",
}
SHORT_DESCRIPTION = {
    NodeKind.KEY: "a small metal key",
    NodeKind.PAPER: "a note with something written on it",
    NodeKind.BOX: "a wooden box",
}


class TerminalStateError(RuntimeError):
    """step() was called after the episode ended."""


@dataclass(frozen=True)
class InventoryItem:
    item_id: str
    kind: str
    short_description: str


@dataclass
class Inventory:
    items: list[InventoryItem] = field(default_factory=list)

    def has(self, item_id: str) -> bool:
        return any(i.item_id == item_id for i in self.items)

    def get(self, item_id: str) -> InventoryItem | None:
        for i in self.items:
            if i.item_id == item_id:
                return i
        return None

    def add(self, item: InventoryItem) -> None:
        if self.has(item.item_id):
            raise ValueError(f"duplicate inventory item {item.item_id}")
        self.items.append(item)

    def describe(self) -> str:
        if not self.items:
            return prompts.BAG_EMPTY
        return "\n".join(f"- {i.item_id} ({i.kind}): {i.short_description}" for i in self.items)


@dataclass
class Feedback:
    text: str
    inventory_description: str
    granted_items: list[str] = field(default_factory=list)
    frame_ref: str = ""


@dataclass
class WorldState:
    scene: SceneConfig
    current_room: int
    pose: AgentPose
    inventory: Inventory
    obtained_knowledge: set[str]
    lock_states: dict[str, str]  # node id -> "locked" | "unlocked"
    removed_instances: set[str]
    granted_nodes: set[str]  # nodes whose contents were already granted
    steps_used: int = 0
    status: str = RUNNING
    last_move: tuple[float, float] = (0.0, 0.0)  # (moved, requested) of last step

    @property
    def room(self):
        return self.scene.rooms[self.current_room]

    @property
    def step_limit(self) -> int:
        return self.scene.step_limit

    def digest(self) -> tuple:
        """Progress fingerprint: a grab succeeded iff this changed."""
        return (
            tuple(i.item_id for i in self.inventory.items),
            frozenset(self.obtained_knowledge),
            tuple(sorted(self.lock_states.items())),
            tuple(sorted(self.removed_instances)),
            tuple(sorted(self.granted_nodes)),
            self.current_room,
            self.status,
        )

    def to_dict(self) -> dict:
        return {
            "current_room": self.current_room,
            "pose": [self.pose.x, self.pose.z, self.pose.yaw, self.pose.pitch],
            "inventory": [[i.item_id, i.kind, i.short_description] for i in self.inventory.items],
            "obtained_knowledge": sorted(self.obtained_knowledge),
            "lock_states": dict(sorted(self.lock_states.items())),
            "removed_instances": sorted(self.removed_instances),
            "granted_nodes": sorted(self.granted_nodes),
            "steps_used": self.steps_used,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, scene: SceneConfig, data: dict) -> "WorldState":
        return cls(
            scene=scene,
            current_room=data["current_room"],
            pose=AgentPose(*data["pose"]),
            inventory=Inventory([InventoryItem(*i) for i in data["inventory"]]),
            obtained_knowledge=set(data["obtained_knowledge"]),
            lock_states=dict(data["lock_states"]),
            removed_instances=set(data["removed_instances"]),
            granted_nodes=set(data["granted_nodes"]),
            steps_used=data["steps_used"],
            status=data["status"],
        )


def init_world(scene: SceneConfig) -> WorldState:
    locks: dict[str, str] = {}
    for room in scene.rooms:
        for node in room.chain.nodes:
            lockable = node.kind in (NodeKind.BOX, NodeKind.EXIT, NodeKind.DOOR)
            if lockable or not node.unlock.is_free:
                locks[node.id] = "unlocked" if node.unlock.is_free else "locked"
    start = scene.agent_start
    return WorldState(
        scene=scene,
        current_room=0,
        pose=AgentPose(start.x, start.z, start.yaw, start.pitch).normalized(),
        inventory=Inventory(),
        obtained_knowledge=set(),
        lock_states=locks,
        removed_instances=set(),
        granted_nodes=set(),
    )


# ---------------------------------------------------------------------------
# movement


def _collision_boxes(state: WorldState):
    return [p.box() for p in state.room.placements if p.instance_id not in state.removed_instances]


def apply_move(state: WorldState, distance: float) -> WorldState:
    """Advance along the floor-projected heading, stopping at first contact."""
    moved, requested = _move(state, distance)
    state.last_move = (moved, requested)
    return state


def _move(state: WorldState, distance: float) -> tuple[float, float]:
    if abs(distance) < 1e-12:
        return 0.0, 0.0
    room = state.room
    dx, dz = heading_vector(state.pose.yaw)
    if distance < 0:
        dx, dz = -dx, -dz
    want = abs(distance)
    free = max_free_advance(
        state.pose.x, state.pose.z, dx, dz, want, _collision_boxes(state), room.width, room.depth, AGENT_RADIUS
    )
    state.pose = replace(state.pose, x=state.pose.x + dx * free, z=state.pose.z + dz * free)
    return free, want


# ---------------------------------------------------------------------------
# grabbing


def _node_placement(state: WorldState, node_id: str) -> Placement | None:
    for p in state.room.placements:
        if p.object_ref == node_id and p.role in ("prop", "exit"):
            return p
    return None


def _grant_contents(state: WorldState, node: PropNode, granted: list[str], shown_items: list[str]) -> None:
    """Grant a node's contents (recursively) to inventory/knowledge."""
    chain = state.room.chain
    for cid in node.contents:
        child = chain.node(cid)
        granted.append(cid)
        if child.kind is NodeKind.PASSWORD:
            state.obtained_knowledge.add(cid)
        else:
            if not state.inventory.has(cid):
                state.inventory.add(
                    InventoryItem(cid, child.kind.value, SHORT_DESCRIPTION.get(child.kind, child.kind.value))
                )
                shown_items.append(f"{cid} ({child.kind.value})")
            _grant_contents(state, child, granted, shown_items)


def _obtain_collectible(state: WorldState, node: PropNode, placement: Placement, granted: list[str]) -> str:
    state.inventory.add(
        InventoryItem(node.id, node.kind.value, SHORT_DESCRIPTION.get(node.kind, node.kind.value))
    )
    state.removed_instances.add(placement.instance_id)
    granted.append(node.id)
    shown: list[str] = []
    _grant_contents(state, node, granted, shown)
    state.granted_nodes.add(node.id)
    text = prompts.fill(prompts.FB_PICKED_UP, item_id=node.id, kind=node.kind.value)
    if shown:
        text += " " + prompts.fill(prompts.FB_OBTAINED, items=", ".join(shown))
    return text


def _open_container(
    state: WorldState, node: PropNode, via: str, granted: list[str], key_id: str | None = None
) -> str:
    """Unlock/open a box, door, or the exit; `via` is "key", "password" or "free"."""
    kind_word = KIND_WORD[node.kind]
    if node.id in state.lock_states:
        state.lock_states[node.id] = "unlocked"
    shown: list[str] = []
    _grant_contents(state, node, granted, shown)
    state.granted_nodes.add(node.id)

    if node.kind is NodeKind.EXIT:
        if state.current_room < len(state.scene.rooms) - 1:
            room_transition(state)
            return prompts.FB_NEXT_ROOM
        state.status = ESCAPED
        return prompts.FB_ESCAPED

    if via == "password":
        text = prompts.fill(prompts.FB_UNLOCKED_WITH_PASSWORD, kind=kind_word)
    elif via == "key":
        text = prompts.fill(prompts.FB_UNLOCKED_WITH_KEY, key_id=key_id or "", kind=kind_word)
    else:
        text = f"You opened the {kind_word}."
    if shown:
        text += " " + prompts.fill(prompts.FB_OBTAINED, items=", ".join(shown))
    return text


def _try_unlock(state: WorldState, node: PropNode, action: AgentAction) -> tuple[str, str | None]:
    """Check credentials against a locked node.

    Returns ("key"|"password", None) on success, or ("", failure feedback).
    """
    chain = state.room.chain
    kind_word = KIND_WORD.get(node.kind, node.kind.value)
    method = node.unlock
    requirement = "key" if method.variant == "key" else "password"
    if method.variant == "key":
        if action.use_item_id is not None:
            if not state.inventory.has(action.use_item_id):
                return "", prompts.fill(prompts.FB_ITEM_NOT_IN_BAG, item_id=action.use_item_id)
            if action.use_item_id == method.required_id:
                return "key", None
            return "", prompts.fill(
                prompts.FB_WRONG_KEY, item_id=action.use_item_id, kind=kind_word
            )
        return "", prompts.fill(prompts.FB_LOCKED_NEEDS, kind=kind_word, requirement=requirement)
    # password lock
    if action.input_text is not None:
        required = chain.node(method.required_id or "")
        if action.input_text.strip() == required.detail_text:
            return "password", None
        return "", prompts.FB_WRONG_PASSWORD
    if action.use_item_id is not None and not state.inventory.has(action.use_item_id):
        return "", prompts.fill(prompts.FB_ITEM_NOT_IN_BAG, item_id=action.use_item_id)
    return "", prompts.fill(prompts.FB_LOCKED_NEEDS, kind=kind_word, requirement=requirement)


def resolve_grab(state: WorldState, action: AgentAction) -> tuple[str, list[str]]:
    """Apply a grab at the center-dot target; returns (feedback text, granted ids)."""
    granted: list[str] = []
    pick = center_ray_pick(state)
    if pick is None or pick.distance > GRAB_RANGE or pick.role == "decoy":
        return prompts.FB_NO_INTERACTION, granted
    if pick.role == "entrance":
        return prompts.FB_DOOR_LOCKED, granted

    node = state.room.chain.node(pick.object_ref)
    locked = state.lock_states.get(node.id) == "locked"
    via = "free"
    if locked:
        via, failure = _try_unlock(state, node, action)
        if failure is not None:
            return failure, granted
        state.lock_states[node.id] = "unlocked"

    if node.kind in (NodeKind.KEY, NodeKind.PAPER):
        placement = _node_placement(state, node.id)
        if placement is None or node.id in state.granted_nodes:
            return prompts.FB_NO_INTERACTION, granted
        return _obtain_collectible(state, node, placement, granted), granted

    # containers and doors
    if not locked and via == "free":
        if node.kind is not NodeKind.EXIT and node.id in state.granted_nodes:
            return prompts.fill(prompts.FB_ALREADY_OPEN, item_id=node.id), granted
    return _open_container(state, node, via, granted, action.use_item_id), granted


def find_node(scene: SceneConfig, node_id: str) -> PropNode | None:
    """Look a node up across every room's chain (bag items carry over rooms)."""
    for room in scene.rooms:
        if room.chain.has_node(node_id):
            return room.chain.node(node_id)
    return None


def resolve_read(state: WorldState, item_id: str) -> str:
    item = state.inventory.get(item_id)
    if item is None:
        return prompts.fill(prompts.FB_READ_NOT_IN_BAG, item_id=item_id)
    node = find_node(state.scene, item_id)
    detail = node.detail_text if node is not None and node.detail_text else item.short_description
    return prompts.fill(prompts.FB_READ, item_id=item_id, detail=detail)


def room_transition(state: WorldState) -> WorldState:
    """Move the agent just inside the next room, facing inward."""
    from .scene import entrance_spawn_point

    state.current_room += 1
    room = state.room
    entrance = next(p for p in room.placements if p.role == "entrance")
    pos = entrance_spawn_point(entrance, room)
    yaw = math.degrees(math.atan2(room.width / 2 - pos[0], room.depth / 2 - pos[1])) % 360.0
    state.pose = AgentPose(pos[0], pos[1], yaw, 0.0)
    return state


# ---------------------------------------------------------------------------
# stepping


@dataclass
class StepOutcome:
    state: WorldState
    feedback: Feedback
    action: AgentAction | None  # None when the raw message failed to parse
    parse_error: str | None
    grab_attempted: bool
    grab_succeeded: bool
    distance_moved: float


def step(state: WorldState, action: AgentAction) -> tuple[WorldState, Feedback]:
    outcome = _step_impl(state, action, None)
    return outcome.state, outcome.feedback


def step_raw(state: WorldState, raw: str) -> StepOutcome:
    """Parse and apply one protocol message; parse failures still cost a step."""
    try:
        action = parse_action(raw)
    except ActionParseError as e:
        return _step_impl(state, None, str(e))
    return _step_impl(state, action, None)


def _step_impl(state: WorldState, action: AgentAction | None, parse_error: str | None) -> StepOutcome:
    if state.status != RUNNING:
        raise TerminalStateError(f"episode already {state.status}")

    parts: list[str] = []
    granted: list[str] = []
    grab_attempted = False
    grab_succeeded = False
    distance_moved = 0.0

    if action is None:
        parts.append(prompts.fill(prompts.FB_PARSE_ERROR, reason=parse_error or "unreadable message"))
    else:
        pre_camera = Camera(state.pose)
        pre_digest = state.digest()

        yaw, pitch = state.pose.yaw, state.pose.pitch
        if action.look_at is not None:
            yaw, pitch = look_at_to_angles(pre_camera, *action.look_at)
        else:
            if action.rotate_right is not None:
                yaw = (yaw + action.rotate_right) % 360.0
            if action.rotate_down is not None:
                pitch = max(-90.0, min(90.0, pitch + action.rotate_down))
        state.pose = replace(state.pose, yaw=yaw, pitch=pitch)

        if action.move_forward is not None:
            moved, requested = _move(state, action.move_forward)
            state.last_move = (moved, requested)
            distance_moved = moved
            if requested - moved > MOVE_REPORT_EPS:
                parts.append(
                    prompts.fill(
                        prompts.FB_MOVE_BLOCKED, moved=f"{moved:.2f}", requested=f"{requested:.2f}"
                    )
                )

        # jump is accepted and logged; there is no vertical geometry to use it on

        if action.grab:
            grab_attempted = True
            text, granted = resolve_grab(state, action)
            parts.append(text)
            grab_succeeded = state.digest() != pre_digest

        if action.read is not None:
            parts.append(resolve_read(state, action.read))

    text = " ".join(p for p in parts if p) or prompts.FB_NO_INTERACTION
    state.steps_used += 1
    if state.status == RUNNING and state.steps_used >= state.step_limit:
        state.status = FAILED

    feedback = Feedback(
        text=text,
        inventory_description=state.inventory.describe(),
        granted_items=granted,
        frame_ref=f"step_{state.steps_used:04d}",
    )
    return StepOutcome(state, feedback, action, parse_error, grab_attempted, grab_succeeded, distance_moved)
