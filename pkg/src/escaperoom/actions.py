"""The agent action message: schema, ranges, and strict parsing.

One message per step.  Every field is optional; a missing or null field means
the sub-action is not performed.  Unknown keys, wrong types, and out-of-range
values are parse errors; the environment surfaces the error text as feedback
and the step still counts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

MOVE_RANGE = (-10.0, 10.0)
ROTATE_RIGHT_RANGE = (-180.0, 180.0)
ROTATE_DOWN_RANGE = (-90.0, 90.0)

ALLOWED_KEYS = {
    "move_forward",
    "rotate_right",
    "rotate_down",
    "jump",
    "look_at",
    "grab",
    "interactions",
    "read",
    "rationale",
}
INTERACTION_KEYS = {"use_item_id", "input"}


class ActionParseError(ValueError):
    """Raised when a raw message does not conform to the action schema."""


@dataclass(frozen=True)
class AgentAction:
    move_forward: float | None = None
    rotate_right: float | None = None
    rotate_down: float | None = None
    jump: bool = False
    look_at: tuple[float, float] | None = None
    grab: bool = False
    use_item_id: str | None = None
    input_text: str | None = None
    read: str | None = None
    rationale: str = ""

    def to_dict(self) -> dict:
        """Protocol-shaped dict (round-trips through parse_action)."""
        out: dict = {}
        if self.move_forward is not None:
            out["move_forward"] = self.move_forward
        if self.rotate_right is not None:
            out["rotate_right"] = self.rotate_right
        if self.rotate_down is not None:
            out["rotate_down"] = self.rotate_down
        if self.jump:
            out["jump"] = True
        if self.look_at is not None:
            out["look_at"] = [self.look_at[0], self.look_at[1]]
        if self.grab:
            out["grab"] = True
        if self.use_item_id is not None or self.input_text is not None:
            inter: dict = {}
            if self.use_item_id is not None:
                inter["use_item_id"] = self.use_item_id
            if self.input_text is not None:
                inter["input"] = self.input_text
            out["interactions"] = inter
        if self.read is not None:
            out["read"] = self.read
        if self.rationale:
            out["rationale"] = self.rationale
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _strip_code_fence(text: str) -> str:
    s = text.strip()
    if s.startswith("```"):
        first_newline = s.find("\n")
        if first_newline != -1 and s.endswith("```"):
            s = s[first_newline + 1 : -3].strip()
    return s


def _number(value, name: str, lo: float, hi: float) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ActionParseError(f"{name} must be a number")
    v = float(value)
    if math.isnan(v) or math.isinf(v):
        raise ActionParseError(f"{name} must be a finite number")
    if not (lo <= v <= hi):
        raise ActionParseError(f"{name} must be within [{lo:g}, {hi:g}]")
    return v


def _boolean(value, name: str) -> bool:
    if not isinstance(value, bool):
        raise ActionParseError(f"{name} must be a boolean")
    return value


def _string(value, name: str) -> str:
    if not isinstance(value, str):
        raise ActionParseError(f"{name} must be a string")
    return value


def parse_action(raw: str) -> AgentAction:
    """Parse one protocol message; raises ActionParseError on any violation."""
    try:
        data = json.loads(_strip_code_fence(raw))
    except json.JSONDecodeError as e:
        raise ActionParseError(f"message is not valid JSON ({e.msg})") from e
    if not isinstance(data, dict):
        raise ActionParseError("message must be a JSON object")

    unknown = set(data) - ALLOWED_KEYS
    if unknown:
        raise ActionParseError(f"unknown key(s): {', '.join(sorted(unknown))}")

    data = {k: v for k, v in data.items() if v is not None}

    move = rot_r = rot_d = None
    if "move_forward" in data:
        move = _number(data["move_forward"], "move_forward", *MOVE_RANGE)
    if "rotate_right" in data:
        rot_r = _number(data["rotate_right"], "rotate_right", *ROTATE_RIGHT_RANGE)
    if "rotate_down" in data:
        rot_d = _number(data["rotate_down"], "rotate_down", *ROTATE_DOWN_RANGE)

    jump = _boolean(data["jump"], "jump") if "jump" in data else False
    grab = _boolean(data["grab"], "grab") if "grab" in data else False

    look_at = None
    if "look_at" in data:
        la = data["look_at"]
        if not isinstance(la, (list, tuple)) or len(la) != 2:
            raise ActionParseError("look_at must be a list of two numbers [x, y]")
        look_at = (_number(la[0], "look_at.x", 0.0, 1.0), _number(la[1], "look_at.y", 0.0, 1.0))

    use_item_id = input_text = None
    if "interactions" in data:
        inter = data["interactions"]
        if not isinstance(inter, dict):
            raise ActionParseError("interactions must be an object")
        bad = set(inter) - INTERACTION_KEYS
        if bad:
            raise ActionParseError(f"unknown key(s) in interactions: {', '.join(sorted(bad))}")
        if inter.get("use_item_id") is not None:
            use_item_id = _string(inter["use_item_id"], "interactions.use_item_id") or None
        if inter.get("input") is not None:
            input_text = _string(inter["input"], "interactions.input") or None

    read = None
    if "read" in data:
        read = _string(data["read"], "read") or None

    rationale = _string(data["rationale"], "rationale") if "rationale" in data else ""

    return AgentAction(
        move_forward=move,
        rotate_right=rot_r,
        rotate_down=rot_d,
        jump=jump,
        look_at=look_at,
        grab=grab,
        use_item_id=use_item_id,
        input_text=input_text,
        read=read,
        rationale=rationale,
    )
