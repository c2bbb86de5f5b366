"""Scripted oracle: grid path planning plus aim-and-grab against ground truth.

The planner drives a shadow world one action at a time: it plans the next
protocol message from the true scene state, applies it through the ordinary
step machinery, and re-plans from the real outcome.  The emitted action list
therefore replays byte-for-byte in any fresh world of the same scene.  Path
lengths it reports are the optimal-distance figure used for scene validation
and movement-correlation analysis.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass

from .actions import AgentAction
from .chain import NodeKind, PropChain, PropNode
from .geometry import Box, ray_box_exit, ray_box_intersect, segment_clear
from .pose import AGENT_RADIUS, EYE_HEIGHT, GRAB_RANGE
from .render import Camera, center_ray_pick, project_point
from .scene import Placement, SceneConfig
from .world import RUNNING, WorldState, init_world, step_raw

GRID_RES = 0.25
# clearance so straight lines between free cell centers never graze an obstacle
GRID_INFLATION = AGENT_RADIUS + GRID_RES * math.sqrt(2) / 2 + 0.005
RANGE_MARGIN = 0.2
MAX_LEG = 10.0


@dataclass
class OraclePlan:
    actions: list[str]
    escaped: bool
    steps: int
    path_length: float
    failure_reason: str = ""


@dataclass
class _Grid:
    width: float
    depth: float
    nx: int
    nz: int
    free: list[list[bool]]

    def cell_of(self, x: float, z: float) -> tuple[int, int]:
        i = min(self.nx - 1, max(0, int(x / GRID_RES)))
        j = min(self.nz - 1, max(0, int(z / GRID_RES)))
        return i, j

    def center(self, i: int, j: int) -> tuple[float, float]:
        return (i + 0.5) * GRID_RES, (j + 0.5) * GRID_RES


def build_grid(state: WorldState) -> _Grid:
    return build_room_grid(state.room, state.removed_instances)


def build_room_grid(room, removed: set[str] | frozenset[str] = frozenset()) -> _Grid:
    nx = max(1, int(room.width / GRID_RES))
    nz = max(1, int(room.depth / GRID_RES))
    boxes = [
        p.box().inflated_xz(GRID_INFLATION)
        for p in room.placements
        if p.instance_id not in removed
    ]
    free = [[True] * nz for _ in range(nx)]
    for i in range(nx):
        for j in range(nz):
            x, z = (i + 0.5) * GRID_RES, (j + 0.5) * GRID_RES
            if not (GRID_INFLATION <= x <= room.width - GRID_INFLATION) or not (
                GRID_INFLATION <= z <= room.depth - GRID_INFLATION
            ):
                free[i][j] = False
                continue
            if any(b.contains_xz(x, z) for b in boxes):
                free[i][j] = False
    return _Grid(room.width, room.depth, nx, nz, free)


def astar(grid: _Grid, start: tuple[int, int], goals: set[tuple[int, int]]) -> list[tuple[int, int]] | None:
    """8-connected A* without corner cutting; returns cell path incl. endpoints."""
    if not goals:
        return None
    if start in goals:
        return [start]

    def h(c: tuple[int, int]) -> float:
        return min(math.hypot(c[0] - g[0], c[1] - g[1]) for g in goals)

    open_heap: list[tuple[float, float, tuple[int, int]]] = [(h(start), 0.0, start)]
    came: dict[tuple[int, int], tuple[int, int]] = {}
    gscore = {start: 0.0}
    closed: set[tuple[int, int]] = set()
    while open_heap:
        _, g, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        closed.add(cur)
        if cur in goals:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            return path[::-1]
        ci, cj = cur
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ni, nj = ci + di, cj + dj
                if not (0 <= ni < grid.nx and 0 <= nj < grid.nz):
                    continue
                if not grid.free[ni][nj] and (ni, nj) not in goals:
                    continue
                if di != 0 and dj != 0:
                    # no diagonal squeeze between blocked cells
                    if not grid.free[ci + di][cj] or not grid.free[ci][cj + dj]:
                        continue
                step = math.hypot(di, dj)
                ng = g + step
                if ng < gscore.get((ni, nj), math.inf):
                    gscore[(ni, nj)] = ng
                    came[(ni, nj)] = cur
                    heapq.heappush(open_heap, (ng + h((ni, nj)), ng, (ni, nj)))
    return None


def grid_path_length(path: list[tuple[int, int]]) -> float:
    return sum(
        math.hypot(b[0] - a[0], b[1] - a[1]) * GRID_RES for a, b in zip(path, path[1:])
    )


# ---------------------------------------------------------------------------
# target selection and visibility


def _aim_point(p: Placement) -> tuple[float, float, float]:
    b = p.box()
    return b.center


def _first_hit_is(
    room,
    removed: set[str] | frozenset[str],
    eye: tuple[float, float, float],
    aim: tuple[float, float, float],
    target: str,
) -> tuple[bool, float]:
    """Does the eye->aim ray hit the target placement first?  Returns (ok, dist)."""
    d = (aim[0] - eye[0], aim[1] - eye[1], aim[2] - eye[2])
    length = math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)
    if length < 1e-9:
        return False, 0.0
    best_id, best_t = None, math.inf
    for p in room.placements:
        if p.instance_id in removed:
            continue
        t = ray_box_intersect(eye, d, p.box())
        if t is not None and t < best_t:
            best_id, best_t = p.instance_id, t
    if best_id != target:
        return False, 0.0
    shell = ray_box_exit(eye, d, Box(0, 0, 0, room.width, room.wall_height, room.depth))
    if shell is not None and shell[0] < best_t:
        return False, 0.0
    return True, best_t * length


def _reachable_standoff(state: WorldState, target: Placement) -> tuple[bool, float]:
    """Can the agent grab the target from its current exact position?"""
    aim = _aim_point(target)
    eye = (state.pose.x, EYE_HEIGHT, state.pose.z)
    ok, dist = _first_hit_is(state.room, state.removed_instances, eye, aim, target.instance_id)
    return ok and dist <= GRAB_RANGE - RANGE_MARGIN, dist


def _goal_cells(state: WorldState, grid: _Grid, target: Placement) -> set[tuple[int, int]]:
    return goal_cells_for_room(state.room, state.removed_instances, grid, target)


def goal_cells_for_room(
    room, removed: set[str] | frozenset[str], grid: _Grid, target: Placement
) -> set[tuple[int, int]]:
    """Free cells from which the target is within range and first on the ray."""
    aim = _aim_point(target)
    goals: set[tuple[int, int]] = set()
    reach = GRAB_RANGE - RANGE_MARGIN
    i_lo = max(0, int((aim[0] - reach) / GRID_RES) - 1)
    i_hi = min(grid.nx - 1, int((aim[0] + reach) / GRID_RES) + 1)
    j_lo = max(0, int((aim[2] - reach) / GRID_RES) - 1)
    j_hi = min(grid.nz - 1, int((aim[2] + reach) / GRID_RES) + 1)
    for i in range(i_lo, i_hi + 1):
        for j in range(j_lo, j_hi + 1):
            if not grid.free[i][j]:
                continue
            cx, cz = grid.center(i, j)
            eye = (cx, EYE_HEIGHT, cz)
            d3 = math.dist(eye, aim)
            if d3 > reach:
                continue
            ok, _ = _first_hit_is(room, removed, eye, aim, target.instance_id)
            if ok:
                goals.add((i, j))
    return goals


def reachable_component(grid: _Grid, seeds: set[tuple[int, int]]) -> set[tuple[int, int]]:
    """Free cells connected to any seed cell (8-connected, no corner cutting)."""
    seen = {s for s in seeds if grid.free[s[0]][s[1]]}
    frontier = list(seen)
    while frontier:
        ci, cj = frontier.pop()
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                if di == 0 and dj == 0:
                    continue
                ni, nj = ci + di, cj + dj
                if not (0 <= ni < grid.nx and 0 <= nj < grid.nz):
                    continue
                if (ni, nj) in seen or not grid.free[ni][nj]:
                    continue
                if di != 0 and dj != 0 and (not grid.free[ci + di][cj] or not grid.free[ci][cj + dj]):
                    continue
                seen.add((ni, nj))
                frontier.append((ni, nj))
    return seen


def _next_target(state: WorldState) -> PropNode | None:
    """First chain node, in chain order, that is interactable and needed now."""
    chain: PropChain = state.room.chain
    for node in chain.nodes:
        if node.kind is NodeKind.PASSWORD:
            continue
        if node.kind in (NodeKind.KEY, NodeKind.PAPER):
            if not node.show or state.inventory.has(node.id):
                continue
        elif node.kind in (NodeKind.BOX, NodeKind.DOOR):
            if not node.show or state.lock_states.get(node.id) != "locked":
                continue
        elif node.kind is NodeKind.EXIT:
            pass
        if _prereq_satisfied(state, node):
            return node
    return None


def _prereq_satisfied(state: WorldState, node: PropNode) -> bool:
    u = node.unlock
    if u.is_free:
        return True
    if u.variant == "key":
        return state.inventory.has(u.required_id or "")
    return (u.required_id or "") in state.obtained_knowledge


def _credentials(state: WorldState, node: PropNode) -> tuple[str | None, str | None]:
    u = node.unlock
    if u.is_free:
        return None, None
    if u.variant == "key":
        return u.required_id, None
    password = state.room.chain.node(u.required_id or "").detail_text
    return None, password


# ---------------------------------------------------------------------------
# the oracle loop


def _emit(state: WorldState, actions: list[str], action: AgentAction) -> tuple[float, bool]:
    raw = json.dumps(action.to_dict())
    actions.append(raw)
    outcome = step_raw(state, raw)
    return outcome.distance_moved, outcome.grab_succeeded


def _yaw_move_action(state: WorldState, to_x: float, to_z: float, rationale: str) -> AgentAction:
    dx, dz = to_x - state.pose.x, to_z - state.pose.z
    dist = math.hypot(dx, dz)
    target_yaw = math.degrees(math.atan2(dx, dz)) % 360.0
    delta = (target_yaw - state.pose.yaw + 180.0) % 360.0 - 180.0
    # keep the protocol's closed range: +/-180 both mean about-face
    delta = max(-180.0, min(180.0, delta))
    return AgentAction(
        move_forward=min(dist, MAX_LEG),
        rotate_right=delta if abs(delta) > 1e-9 else None,
        rationale=rationale,
    )


def _aim_action(state: WorldState, aim: tuple[float, float, float], label: str) -> AgentAction:
    camera = Camera(state.pose)
    uv = project_point(camera, aim)
    if uv is not None and 0.0 <= uv[0] <= 1.0 and 0.0 <= uv[1] <= 1.0:
        return AgentAction(look_at=uv, rationale=f"Centering my view on the {label}.")
    eye = camera.eye()
    d = (aim[0] - eye[0], aim[1] - eye[1], aim[2] - eye[2])
    horiz = math.hypot(d[0], d[2])
    yaw = math.degrees(math.atan2(d[0], d[2])) % 360.0
    pitch = math.degrees(math.atan2(-d[1], horiz))
    dyaw = (yaw - state.pose.yaw + 180.0) % 360.0 - 180.0
    dpitch = max(-90.0, min(90.0, pitch - state.pose.pitch))
    return AgentAction(
        rotate_right=dyaw if abs(dyaw) > 1e-9 else None,
        rotate_down=dpitch if abs(dpitch) > 1e-9 else None,
        rationale=f"Turning to face the {label}.",
    )


def _shortcut(state: WorldState, waypoints: list[tuple[float, float]]) -> tuple[float, float]:
    """Furthest waypoint reachable in a straight line from the agent."""
    room = state.room
    boxes = [
        p.box() for p in room.placements if p.instance_id not in state.removed_instances
    ]
    best = waypoints[0]
    for w in waypoints:
        if segment_clear(
            state.pose.x, state.pose.z, w[0], w[1], boxes, room.width, room.depth, AGENT_RADIUS
        ):
            best = w
        else:
            break
    return best


def _label(node: PropNode) -> str:
    from .world import KIND_WORD

    return KIND_WORD.get(node.kind, node.kind.value)


def plan_escape(scene: SceneConfig, max_steps: int | None = None) -> OraclePlan:
    """Plan and execute a full escape; returns the action transcript."""
    state = init_world(scene)
    limit = max_steps or scene.step_limit
    actions: list[str] = []
    path_length = 0.0
    pending_reads: list[str] = []
    stall_guard = 0

    while state.status == RUNNING and state.steps_used < limit:
        if pending_reads:
            note_id = pending_reads.pop(0)
            _emit(state, actions, AgentAction(read=note_id, rationale=f"Reading {note_id} for clues."))
            continue

        node = _next_target(state)
        if node is None:
            return OraclePlan(actions, False, state.steps_used, path_length, "no interactable target")
        placement = _target_placement(state, node)
        if placement is None:
            return OraclePlan(actions, False, state.steps_used, path_length, f"unreachable prerequisite {node.id}")

        in_range, _ = _reachable_standoff(state, placement)
        if not in_range:
            grid = build_grid(state)
            goals = _goal_cells(state, grid, placement)
            if not goals:
                return OraclePlan(
                    actions, False, state.steps_used, path_length, f"no standoff with line of sight to {node.id}"
                )
            start = grid.cell_of(state.pose.x, state.pose.z)
            path = astar(grid, start, goals)
            if path is None:
                return OraclePlan(
                    actions, False, state.steps_used, path_length, f"no path to {node.id}"
                )
            waypoints = [grid.center(i, j) for i, j in path[1:]] or [grid.center(*path[0])]
            hop = _shortcut(state, waypoints)
            if math.hypot(hop[0] - state.pose.x, hop[1] - state.pose.z) < 1e-6:
                hop = waypoints[0]  # cannot shortcut; take the first grid hop anyway
            moved, _ = _emit(
                state,
                actions,
                _yaw_move_action(state, hop[0], hop[1], f"Heading toward the {_label(node)}."),
            )
            path_length += moved
            stall_guard = stall_guard + 1 if moved < 1e-6 else 0
            if stall_guard > 4:
                return OraclePlan(actions, False, state.steps_used, path_length, f"stuck approaching {node.id}")
            continue

        aim = _aim_point(placement)
        pick = center_ray_pick(state)
        centered = (
            pick is not None
            and pick.instance_id == placement.instance_id
            and pick.distance <= GRAB_RANGE
        )
        if not centered:
            _emit(state, actions, _aim_action(state, aim, _label(node)))
            pick = center_ray_pick(state)
            if not (
                pick is not None
                and pick.instance_id == placement.instance_id
                and pick.distance <= GRAB_RANGE
            ):
                return OraclePlan(
                    actions, False, state.steps_used, path_length, f"cannot center {node.id}"
                )
            continue

        key_id, password = _credentials(state, node)
        rationale = _grab_rationale(node, key_id, password)
        inv_papers_before = {i.item_id for i in state.inventory.items}
        _, succeeded = _emit(
            state,
            actions,
            AgentAction(grab=True, use_item_id=key_id, input_text=password, rationale=rationale),
        )
        if not succeeded:
            return OraclePlan(
                actions, False, state.steps_used, path_length, f"grab on {node.id} had no effect"
            )
        for item in state.inventory.items:
            if item.kind == "paper" and item.item_id not in inv_papers_before:
                pending_reads.append(item.item_id)

    if state.status == ESCAPED_STATUS:
        return OraclePlan(actions, True, state.steps_used, path_length)
    return OraclePlan(actions, False, state.steps_used, path_length, "step budget exhausted")


ESCAPED_STATUS = "escaped"


def _target_placement(state: WorldState, node: PropNode) -> Placement | None:
    for p in state.room.placements:
        if p.object_ref == node.id and p.instance_id not in state.removed_instances:
            return p
    return None


def _grab_rationale(node: PropNode, key_id: str | None, password: str | None) -> str:
    label = _label(node)
    if node.kind is NodeKind.EXIT:
        if key_id:
            return f"Using {key_id} to open the door and escape the room."
        if password:
            return "Entering the password to open the door and escape the room."
        return "Opening the door to escape the room."
    if key_id:
        return f"Using {key_id} to unlock the {label} {node.id} in front of me."
    if password:
        return f"Entering the password to unlock the {label} {node.id} in front of me."
    return f"Grabbing the {label} {node.id} at the center of my view."
