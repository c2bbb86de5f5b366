"""External-evaluator pipelines: intent-outcome consistency and debriefing.

A judge is anything with send(prompt) -> reply text.  The deterministic stub
supports tests and offline runs; the remote client speaks a plain
text-completion contract at temperature zero.  Replies that do not match the
required shapes are excluded and counted, never coerced into verdicts.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Protocol

import httpx

from . import prompts
from .metrics import EpisodeLog
from .scene import SceneConfig


class JudgeReplyError(ValueError):
    """Judge reply does not match the required output shape."""


class JudgeClient(Protocol):
    def send(self, prompt: str) -> str: ...


@dataclass(frozen=True)
class ConsistencyVerdict:
    step_index: int
    verdict: int  # 0 or 1
    raw_reply: str


@dataclass
class DebriefResult:
    recovered_story: str
    score: float | None  # None when the judge reply was unusable
    groundtruth_ref: str
    unusable_reply: str | None = None


# ---------------------------------------------------------------------------
# prompt building and reply parsing


def build_consistency_prompt(rationale: str, responses: str) -> str:
    return prompts.fill(prompts.CONSISTENCY_PROMPT_TEMPLATE, rationale=rationale, response=responses)


_BARE_VERDICT = re.compile(r"^Consistency:\s*([01])$")


def parse_consistency(reply: str, step_index: int = 0) -> ConsistencyVerdict:
    """Accept {"Consistency": 0|1} or the bare 'Consistency: 0|1' form only."""
    s = reply.strip()
    if s.startswith("```"):
        first = s.find("\n")
        if first != -1 and s.endswith("```"):
            s = s[first + 1 : -3].strip()
    m = _BARE_VERDICT.match(s)
    if m:
        return ConsistencyVerdict(step_index, int(m.group(1)), reply)
    try:
        data = json.loads(s)
    except json.JSONDecodeError:
        raise JudgeReplyError(f"unusable judge reply: {reply!r}") from None
    if (
        isinstance(data, dict)
        and set(data) == {"Consistency"}
        and isinstance(data["Consistency"], int)
        and not isinstance(data["Consistency"], bool)
        and data["Consistency"] in (0, 1)
    ):
        return ConsistencyVerdict(step_index, data["Consistency"], reply)
    raise JudgeReplyError(f"unusable judge reply: {reply!r}")


@dataclass
class CioResult:
    c_io: float | None  # None when no successful interactions exist
    n_evaluated: int
    n_excluded: int
    verdicts: list[ConsistencyVerdict] = field(default_factory=list)


def compute_cio(log: EpisodeLog, client: JudgeClient, max_in_flight: int = 4) -> CioResult:
    """Mean consistency verdict over successful interactions.

    Unusable replies are excluded from the mean and counted.  Judge calls for
    distinct steps are independent and issued concurrently up to the cap.
    """
    targets = [s for s in log.steps if s.grab_succeeded]
    if not targets:
        return CioResult(None, 0, 0)
    prompts_by_step = [
        (s.index, build_consistency_prompt(s.rationale, s.feedback_text)) for s in targets
    ]
    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        replies = list(pool.map(lambda p: client.send(p[1]), prompts_by_step))
    verdicts: list[ConsistencyVerdict] = []
    excluded = 0
    for (idx, _), reply in zip(prompts_by_step, replies):
        try:
            verdicts.append(parse_consistency(reply, idx))
        except JudgeReplyError:
            excluded += 1
    if not verdicts:
        return CioResult(None, 0, excluded)
    mean = sum(v.verdict for v in verdicts) / len(verdicts)
    return CioResult(mean, len(verdicts), excluded, verdicts)


# ---------------------------------------------------------------------------
# debriefing


class DebriefPlayer(Protocol):
    def reply(self, prompt: str, history: str) -> str: ...


@dataclass
class ScriptedPlayer:
    """Replies with fixed text on the final step; for tests and baselines."""

    final_text: str
    interim_text: str = ""

    def reply(self, prompt: str, history: str) -> str:
        if prompt.startswith("Step 3"):
            return self.final_text
        return self.interim_text


def interaction_history_text(log: EpisodeLog) -> str:
    lines = []
    for s in log.steps:
        lines.append(f"Step {s.index} action: {s.raw_action}")
        lines.append(f"Step {s.index} result: {s.feedback_text}")
    return "\n".join(lines)


_SCORE_JSON = re.compile(r"\{\s*\"score\"\s*:\s*([0-9]+(?:\.[0-9]+)?)\s*\}")
_SCORE_BARE = re.compile(r"^(?:Score:\s*)?([0-9]+(?:\.[0-9]+)?)$")


def parse_debrief_score(reply: str) -> float:
    s = reply.strip()
    m = _SCORE_JSON.search(s) or _SCORE_BARE.match(s)
    if not m:
        raise JudgeReplyError(f"non-numeric debrief score reply: {reply!r}")
    score = float(m.group(1))
    if not (0.0 <= score <= 5.0):
        raise JudgeReplyError(f"debrief score out of range: {score}")
    return score


def run_debriefing(
    log: EpisodeLog, scene: SceneConfig, player: DebriefPlayer, client: JudgeClient
) -> DebriefResult:
    """Three-step story reconstruction by the player, scored 0-5 by the judge.

    Only escaped episodes are eligible; the player sees its full interaction
    history as textual context alongside each step prompt.
    """
    if log.outcome != "escaped":
        raise ValueError("debriefing applies only to escaped episodes")
    history = interaction_history_text(log)
    replies = []
    intro = prompts.DEBRIEF_INTRO
    for i, step_prompt in enumerate(prompts.DEBRIEF_STEPS):
        full = (intro + "\n\n" + step_prompt) if i == 0 else step_prompt
        replies.append(player.reply(full, history))
    recovered = "\n\n".join(r for r in replies if r.strip())
    scoring = prompts.fill(
        prompts.DEBRIEF_SCORING_PROMPT_V1, groundtruth=scene.story_text, recovered=recovered
    )
    reply = client.send(scoring)
    try:
        score = parse_debrief_score(reply)
    except JudgeReplyError:
        return DebriefResult(recovered, None, scene.scene_id, unusable_reply=reply)
    return DebriefResult(recovered, score, scene.scene_id)


# ---------------------------------------------------------------------------
# clients


@dataclass
class StubJudge:
    """Deterministic pattern-matching judge for tests and offline runs.

    Consistency: verdict 1 iff the rationale names an object that the
    response reports interacting with (ids like key_1 or the kind words), with
    the escape special case checking for intent-to-exit wording.  Debrief
    scoring: 5 for a normalized exact match, 0 for empty, else scaled token
    overlap.  Extra rules can be loaded from a text file of lines
    "<verdict><TAB><regex>" tried in order against the whole prompt.
    """

    rules: list[tuple[int, re.Pattern]] = field(default_factory=list)

    @classmethod
    def from_rules_file(cls, path) -> "StubJudge":
        rules = []
        with open(path, encoding="utf-8") as f:
            for ln in f:
                ln = ln.rstrip("\n")
                if not ln or ln.startswith("#"):
                    continue
                verdict, _, pattern = ln.partition("\t")
                rules.append((int(verdict), re.compile(pattern)))
        return cls(rules)

    def send(self, prompt: str) -> str:
        if '"score"' in prompt and "Ground-truth story:" in prompt:
            return self._score_debrief(prompt)
        return self._judge_consistency(prompt)

    def _judge_consistency(self, prompt: str) -> str:
        for verdict, pattern in self.rules:
            if pattern.search(prompt):
                return f"Consistency: {verdict}"
        rationale, response = _extract_slots(prompt)
        rl = rationale.lower()
        if prompts.FB_ESCAPED in response:
            intent = any(w in rl for w in ("escape", "exit", "door", "leave", "way out"))
            return json.dumps({"Consistency": 1 if intent else 0})
        named = _object_tokens(response)
        hit = any(tok in rl for tok in named)
        return json.dumps({"Consistency": 1 if hit else 0})

    def _score_debrief(self, prompt: str) -> str:
        try:
            groundtruth = prompt.split("Ground-truth story:\n", 1)[1].split("\n\nRecovered story:\n", 1)[0]
            recovered = prompt.split("\n\nRecovered story:\n", 1)[1].rsplit("\n\nRespond only", 1)[0]
        except IndexError:
            return "unscorable"
        norm = lambda t: " ".join(t.lower().split())  # noqa: E731
        if not norm(recovered):
            return json.dumps({"score": 0})
        if norm(recovered) == norm(groundtruth):
            return json.dumps({"score": 5})
        a = set(norm(groundtruth).split())
        b = set(norm(recovered).split())
        overlap = len(a & b) / len(a | b) if a | b else 0.0
        return json.dumps({"score": round(5 * overlap)})


def _extract_slots(prompt: str) -> tuple[str, str]:
    marker = "Please score the following interaction:"
    tail = prompt.split(marker, 1)[-1]
    rationale = ""
    response = ""
    m = re.search(r"rationale: (.*)\nresponse\(s\): (.*)$", tail, re.S)
    if m:
        rationale, response = m.group(1), m.group(2)
    return rationale, response


_ID_TOKEN = re.compile(r"\b([a-z]+_[0-9]+(?:_r[0-9]+)?)\b")


def _object_tokens(response: str) -> set[str]:
    tokens = set(_ID_TOKEN.findall(response))
    for word in ("key", "note", "box", "door"):
        if re.search(rf"\b{word}\b", response):
            tokens.add(word)
    return tokens


@dataclass
class RemoteDebriefPlayer:
    """Debrief player over the chat contract used for remote agents.

    Each step posts {"messages": [history turn, prompt turn], "temperature": 0,
    "max_tokens": n} and expects {"text": "..."}.
    """

    endpoint: str
    timeout: float = 120.0
    max_tokens: int = 1024

    def reply(self, prompt: str, history: str) -> str:
        payload = {
            "messages": [
                {"role": "user", "content": "Your interaction history:\n" + history},
                {"role": "user", "content": prompt},
            ],
            "temperature": 0.0,
            "max_tokens": self.max_tokens,
        }
        resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()["text"]


@dataclass
class RemoteJudgeClient:
    """Text-completion client: POST {prompt, temperature, max_tokens} -> {text}.

    Requests pin temperature 0; transient transport errors retry with a fixed
    backoff before surfacing.
    """

    endpoint: str
    timeout: float = 60.0
    retries: int = 2
    max_tokens: int = 512

    def send(self, prompt: str) -> str:
        payload = {"prompt": prompt, "temperature": 0.0, "max_tokens": self.max_tokens}
        last: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                return resp.json()["text"]
            except (httpx.HTTPError, KeyError, ValueError) as e:
                last = e
        raise RuntimeError(f"judge endpoint failed after {self.retries + 1} attempts: {last}")
