"""Prop chains: the dependency list of keys, boxes, notes, passwords and the exit.

A chain is an ordered list of nodes whose unlock requirements and containment
relations define the interactions a game requires.  The tail node is always
the exit.  Standard difficulty levels are built here; scenes embed a chain and
place its visible nodes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import Enum


class NodeKind(str, Enum):
    KEY = "key"
    BOX = "box"
    PAPER = "paper"
    PASSWORD = "password"
    EXIT = "exit"
    DOOR = "door"


class Difficulty(str, Enum):
    D1 = "d1"
    D2_KEY = "d2-key"
    D2_PASSWORD = "d2-password"
    D2 = "d2"  # seed picks key vs password
    D3_NOTE_KEY = "d3-note-key"
    D3_KEY_NOTE = "d3-key-note"
    CUSTOM = "custom"


#: Difficulty labels a generator accepts (CUSTOM chains are loaded, not built).
STANDARD_DIFFICULTIES = (
    Difficulty.D1,
    Difficulty.D2_KEY,
    Difficulty.D2_PASSWORD,
    Difficulty.D2,
    Difficulty.D3_NOTE_KEY,
    Difficulty.D3_KEY_NOTE,
)


@dataclass(frozen=True)
class UnlockMethod:
    """How a node is obtained: freely, or by a key/password node's id."""

    variant: str  # "free" | "key" | "password"
    required_id: str | None = None

    @classmethod
    def free(cls) -> "UnlockMethod":
        return cls("free")

    @classmethod
    def key(cls, required_id: str) -> "UnlockMethod":
        return cls("key", required_id)

    @classmethod
    def password(cls, required_id: str) -> "UnlockMethod":
        return cls("password", required_id)

    @property
    def is_free(self) -> bool:
        return self.variant == "free"


@dataclass(frozen=True)
class PropNode:
    """One interactive element of a game.

    ``contents`` are granted immediately when this node is obtained or
    unlocked.  ``show`` controls whether the node is physically placed in the
    scene; password nodes are knowledge and are never shown.  ``detail_text``
    carries note bodies, story fragments, and password digits.
    """

    id: str
    kind: NodeKind
    unlock: UnlockMethod = field(default_factory=UnlockMethod.free)
    contents: tuple[str, ...] = ()
    show: bool = True
    detail_text: str = ""


@dataclass(frozen=True)
class PropChain:
    nodes: tuple[PropNode, ...]
    difficulty_label: Difficulty = Difficulty.CUSTOM

    def node(self, node_id: str) -> PropNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise KeyError(node_id)

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    @property
    def exit_node(self) -> PropNode:
        return self.nodes[-1]

    def shown_nodes(self) -> list[PropNode]:
        return [n for n in self.nodes if n.show]


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)

    # Populated by scene-level solvability validation.
    oracle_steps: int | None = None
    oracle_path_length: float | None = None


def validate_chain(chain: PropChain) -> ValidationReport:
    """Check every chain invariant; violations are reported, never raised."""
    violations: list[str] = []
    if not chain.nodes:
        return ValidationReport(False, ["chain is empty"])

    ids = [n.id for n in chain.nodes]
    seen: set[str] = set()
    for i in ids:
        if i in seen:
            violations.append(f"{i}: duplicate node id")
        seen.add(i)
    by_id = {n.id: n for n in chain.nodes}

    exits = [n for n in chain.nodes if n.kind is NodeKind.EXIT]
    if len(exits) != 1:
        violations.append(f"chain has {len(exits)} exit nodes, expected exactly 1")
    elif chain.nodes[-1].kind is not NodeKind.EXIT:
        violations.append(f"{chain.nodes[-1].id}: tail node is not the exit")
    for n in exits:
        if n.contents:
            violations.append(f"{n.id}: exit node must have empty contents")

    for n in chain.nodes:
        if n.kind is NodeKind.PASSWORD and n.show:
            violations.append(f"{n.id}: password nodes must have show=false")
        if not n.unlock.is_free:
            req = n.unlock.required_id or ""
            if req not in by_id:
                violations.append(f"{n.id}: unlock references unknown id {req!r}")
            else:
                want = NodeKind.KEY if n.unlock.variant == "key" else NodeKind.PASSWORD
                if by_id[req].kind is not want:
                    violations.append(
                        f"{n.id}: unlock requires {req!r} which is a "
                        f"{by_id[req].kind.value}, not a {want.value}"
                    )
        for c in n.contents:
            if c not in by_id:
                violations.append(f"{n.id}: contents reference unknown id {c!r}")

    if violations:
        return ValidationReport(False, violations)

    cycle = _find_cycle(chain)
    if cycle:
        violations.append("dependency cycle: " + " -> ".join(cycle))

    unreachable = sorted(set(by_id) - _obtainable_ids(chain))
    for i in unreachable:
        violations.append(f"{i}: not obtainable from the shown nodes")

    return ValidationReport(not violations, violations)


def _dependency_edges(chain: PropChain) -> dict[str, set[str]]:
    """prerequisite -> dependents, over unlock requirements and containment."""
    edges: dict[str, set[str]] = {n.id: set() for n in chain.nodes}
    for n in chain.nodes:
        if not n.unlock.is_free and n.unlock.required_id in edges:
            edges[n.unlock.required_id].add(n.id)
        for c in n.contents:
            if c in edges:
                edges[n.id].add(c)
    return edges


def _find_cycle(chain: PropChain) -> list[str] | None:
    edges = _dependency_edges(chain)
    color: dict[str, int] = {}
    stack: list[str] = []

    def visit(u: str) -> list[str] | None:
        color[u] = 1
        stack.append(u)
        for v in edges[u]:
            if color.get(v, 0) == 1:
                return stack[stack.index(v) :] + [v]
            if color.get(v, 0) == 0:
                found = visit(v)
                if found:
                    return found
        stack.pop()
        color[u] = 2
        return None

    for node_id in edges:
        if color.get(node_id, 0) == 0:
            found = visit(node_id)
            if found:
                return found
    return None


def _obtainable_ids(chain: PropChain) -> set[str]:
    """Fixpoint of what a player can hold/open starting from the shown nodes."""
    by_id = {n.id: n for n in chain.nodes}
    available = {n.id for n in chain.nodes if n.show or n.kind is NodeKind.EXIT}
    obtained: set[str] = set()
    changed = True
    while changed:
        changed = False
        for i in sorted(available):
            if i in obtained:
                continue
            n = by_id[i]
            if n.unlock.is_free or n.unlock.required_id in obtained:
                obtained.add(i)
                available.update(c for c in n.contents if c in by_id)
                changed = True
    return obtained


def required_interaction_count(chain: PropChain) -> int:
    """Number of nodes the player must successfully interact with.

    Shown obtainable/openable nodes, locked containers, and the exit; excludes
    password knowledge and anything granted automatically as contents.
    """
    report = validate_chain(chain)
    if not report.ok:
        raise ValueError("invalid chain: " + "; ".join(report.violations))
    count = 0
    for n in chain.nodes:
        if n.kind is NodeKind.PASSWORD:
            continue
        if n.kind is NodeKind.EXIT:
            count += 1
        elif n.show:
            count += 1
        elif n.kind in (NodeKind.BOX, NodeKind.DOOR) and not n.unlock.is_free:
            count += 1
    return count


def _draw_password(rng: random.Random) -> str:
    return f"{rng.randrange(10000):04d}"


def build_difficulty_chain(label: Difficulty | str, seed: int) -> PropChain:
    """Build the standard chain for a difficulty level.

    The seed picks id suffixes, password digits, and the key-vs-password
    variant for the generic two-hop level.
    """
    label = Difficulty(label)
    rng = random.Random(("chain", label.value, seed).__repr__())
    suffix = rng.randint(1, 9)

    if label is Difficulty.D1:
        nodes = [PropNode("exit", NodeKind.EXIT, UnlockMethod.free(), show=True)]
        return PropChain(tuple(nodes), label)

    if label is Difficulty.D2:
        label = rng.choice([Difficulty.D2_KEY, Difficulty.D2_PASSWORD])

    if label is Difficulty.D2_KEY:
        key_id = f"key_{suffix}"
        nodes = [
            PropNode(key_id, NodeKind.KEY, show=True, detail_text="a small metal key"),
            PropNode("exit", NodeKind.EXIT, UnlockMethod.key(key_id), show=True),
        ]
        return PropChain(tuple(nodes), Difficulty.D2_KEY)

    if label is Difficulty.D2_PASSWORD:
        note_id, pw_id = f"note_{suffix}", f"password_{suffix}"
        digits = _draw_password(rng)
        nodes = [
            PropNode(
                note_id,
                NodeKind.PAPER,
                contents=(pw_id,),
                show=True,
                detail_text=f"The password is {digits}.",
            ),
            PropNode(pw_id, NodeKind.PASSWORD, show=False, detail_text=digits),
            PropNode("exit", NodeKind.EXIT, UnlockMethod.password(pw_id), show=True),
        ]
        return PropChain(tuple(nodes), label)

    if label is Difficulty.D3_NOTE_KEY:
        note_a, note_b = f"note_{suffix}", f"note_{suffix + 1}"
        pw_id, box_id, key_id = f"password_{suffix}", f"box_{suffix}", f"key_{suffix}"
        digits = _draw_password(rng)
        nodes = [
            PropNode(
                note_a,
                NodeKind.PAPER,
                contents=(pw_id,),
                show=True,
                detail_text=f"The password is {digits}.",
            ),
            PropNode(pw_id, NodeKind.PASSWORD, show=False, detail_text=digits),
            PropNode(
                box_id,
                NodeKind.BOX,
                UnlockMethod.password(pw_id),
                contents=(key_id, note_b),
                show=True,
            ),
            PropNode(key_id, NodeKind.KEY, show=False, detail_text="a small metal key"),
            PropNode(note_b, NodeKind.PAPER, show=False),
            PropNode("exit", NodeKind.EXIT, UnlockMethod.key(key_id), show=True),
        ]
        return PropChain(tuple(nodes), label)

    if label is Difficulty.D3_KEY_NOTE:
        key_id, box_id = f"key_{suffix}", f"box_{suffix}"
        note_id, pw_id = f"note_{suffix}", f"password_{suffix}"
        digits = _draw_password(rng)
        nodes = [
            PropNode(key_id, NodeKind.KEY, show=True, detail_text="a small metal key"),
            PropNode(
                box_id,
                NodeKind.BOX,
                UnlockMethod.key(key_id),
                contents=(note_id,),
                show=True,
            ),
            PropNode(
                note_id,
                NodeKind.PAPER,
                contents=(pw_id,),
                show=False,
                detail_text=f"The password is {digits}.",
            ),
            PropNode(pw_id, NodeKind.PASSWORD, show=False, detail_text=digits),
            PropNode("exit", NodeKind.EXIT, UnlockMethod.password(pw_id), show=True),
        ]
        return PropChain(tuple(nodes), label)

    raise ValueError(f"unknown difficulty label: {label!r}")


def rename_nodes(chain: PropChain, mapping: dict[str, str]) -> PropChain:
    """Rename node ids, rewriting unlock and containment references."""

    def m(i: str) -> str:
        return mapping.get(i, i)

    nodes = []
    for n in chain.nodes:
        unlock = n.unlock
        if not unlock.is_free and unlock.required_id is not None:
            unlock = UnlockMethod(unlock.variant, m(unlock.required_id))
        nodes.append(
            PropNode(m(n.id), n.kind, unlock, tuple(m(c) for c in n.contents), n.show, n.detail_text)
        )
    return PropChain(tuple(nodes), chain.difficulty_label)
