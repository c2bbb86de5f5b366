"""Agent endpoints: oracle, random baseline, replay, and remote model client.

Endpoints never touch world state; they receive observations (frame, feedback,
bag, step prompt) and return one raw protocol message per step.
"""

from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from .actions import AgentAction
from .planner import plan_escape
from .scene import SceneConfig

AGENT_ENDPOINT_ENV = "ESCAPEROOM_AGENT_ENDPOINT"


@dataclass
class Observation:
    step_prompt: str
    feedback_text: str
    bag_description: str
    steps_used: int
    step_limit: int
    frame_png: bytes | None = None
    frame_ref: str = ""


class AgentEndpoint(Protocol):
    name: str

    def start_episode(self, system_prompt: str, history: list[dict] | None = None) -> None: ...

    def observe(self, observation: Observation) -> str: ...

    def end_episode(self, outcome: str) -> None: ...


class AgentFailure(RuntimeError):
    """The endpoint failed; the episode is aborted, not scored."""


@dataclass
class OracleAgent:
    """Replays the scripted planner's solution for its scene."""

    scene: SceneConfig
    name: str = "oracle"
    _actions: list[str] = field(default_factory=list)
    _cursor: int = 0
    path_length: float = 0.0

    def start_episode(self, system_prompt: str, history: list[dict] | None = None) -> None:
        plan = plan_escape(self.scene)
        if not plan.escaped:
            raise AgentFailure(f"oracle cannot solve {self.scene.scene_id}: {plan.failure_reason}")
        self._actions = plan.actions
        self._cursor = len(history or [])  # injected turns were already consumed
        self.path_length = plan.path_length

    def observe(self, observation: Observation) -> str:
        if self._cursor >= len(self._actions):
            return "{}"
        raw = self._actions[self._cursor]
        self._cursor += 1
        return raw

    def end_episode(self, outcome: str) -> None:
        pass


@dataclass
class RandomAgent:
    """Seeded baseline: bounded rotations/moves with occasional grabs."""

    seed: int
    grab_prob: float = 0.15
    name: str = ""
    _rng: random.Random = field(default_factory=random.Random)

    def __post_init__(self) -> None:
        if not self.name:
            self.name = f"random-{self.seed}"

    def start_episode(self, system_prompt: str, history: list[dict] | None = None) -> None:
        self._rng = random.Random(("random-agent", self.seed).__repr__())

    def observe(self, observation: Observation) -> str:
        rng = self._rng
        action = AgentAction(
            rotate_right=round(rng.uniform(-90, 90), 2) if rng.random() < 0.7 else None,
            rotate_down=round(rng.uniform(-20, 30), 2) if rng.random() < 0.25 else None,
            move_forward=round(rng.uniform(0, 3), 2) if rng.random() < 0.7 else None,
            grab=rng.random() < self.grab_prob,
            rationale="random exploration",
        )
        return action.to_json()

    def end_episode(self, outcome: str) -> None:
        pass


@dataclass
class ReplayAgent:
    """Feeds a fixed list of raw messages; '{}' once exhausted."""

    actions: list[str]
    name: str = "replay"
    _cursor: int = 0

    def start_episode(self, system_prompt: str, history: list[dict] | None = None) -> None:
        self._cursor = 0

    def observe(self, observation: Observation) -> str:
        if self._cursor >= len(self.actions):
            return "{}"
        raw = self.actions[self._cursor]
        self._cursor += 1
        return raw

    def end_episode(self, outcome: str) -> None:
        pass


@dataclass
class RemoteAgent:
    """Chat-style remote model endpoint.

    Contract: POST {"messages": [...], "temperature": 0.0, "max_tokens": n}
    -> {"text": "..."}.  The full conversation is resent every step; frames
    travel base64-encoded on the user turns.  ``truncate_turns`` optionally
    caps resent history for small-context endpoints (newest turns win).
    """

    endpoint: str = ""
    name: str = "remote"
    timeout: float = 120.0
    max_tokens: int = 512
    truncate_turns: int | None = None
    _messages: list[dict] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.endpoint:
            self.endpoint = os.environ.get(AGENT_ENDPOINT_ENV, "")
        if not self.endpoint:
            raise ValueError(f"remote agent needs an endpoint ({AGENT_ENDPOINT_ENV})")

    def start_episode(self, system_prompt: str, history: list[dict] | None = None) -> None:
        self._messages = [{"role": "system", "content": system_prompt}]
        self._messages += list(history or [])

    def observe(self, observation: Observation) -> str:
        turn: dict = {"role": "user", "content": observation.step_prompt}
        if observation.frame_png is not None:
            import base64

            turn["frame_b64"] = base64.b64encode(observation.frame_png).decode("ascii")
        self._messages.append(turn)
        payload = {
            "messages": self._trimmed(),
            "temperature": 0.0,
            "max_tokens": self.max_tokens,
        }
        try:
            resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
            resp.raise_for_status()
            text = resp.json()["text"]
        except (httpx.HTTPError, KeyError, ValueError) as e:
            raise AgentFailure(f"remote agent endpoint failed: {e}") from e
        self._messages.append({"role": "assistant", "content": text})
        return text

    def _trimmed(self) -> list[dict]:
        if self.truncate_turns is None or len(self._messages) <= self.truncate_turns + 1:
            return self._messages
        return [self._messages[0]] + self._messages[-self.truncate_turns :]

    def end_episode(self, outcome: str) -> None:
        self._messages = []


def oracle_policy(scene: SceneConfig) -> list[str]:
    """The oracle's full action sequence for a scene (raw protocol messages)."""
    plan = plan_escape(scene)
    if not plan.escaped:
        raise AgentFailure(f"oracle cannot solve {scene.scene_id}: {plan.failure_reason}")
    return plan.actions


def random_policy(seed: int, grab_prob: float = 0.15) -> RandomAgent:
    """Seeded random baseline endpoint."""
    return RandomAgent(seed, grab_prob=grab_prob)
