"""Episode logs and the quantitative suite.

Per-episode quantities are kept as exact rationals and only rendered to
percentages/decimals at the edge, so identities like gsr * attempts ==
successes hold exactly.  Logs are JSON-lines files that are self-certifying:
replaying the raw actions must reproduce every flag and feedback string.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .chain import NodeKind, PropChain, required_interaction_count
from .scene import SceneConfig

LOG_VERSION = 1


class LogFormatError(ValueError):
    """An episode log file violates the line format."""


@dataclass
class StepRecord:
    index: int  # 1-based
    room_index: int  # room the action was taken in
    raw_action: str
    parse_error: str | None
    rationale: str
    feedback_text: str
    granted: list[str]
    grab_attempted: bool
    grab_succeeded: bool
    pose_after: tuple[float, float, float, float]  # x, z, yaw, pitch
    frame_ref: str
    distance_moved: float

    def to_dict(self) -> dict:
        return {
            "kind": "step",
            "index": self.index,
            "room_index": self.room_index,
            "raw_action": self.raw_action,
            "parse_error": self.parse_error,
            "rationale": self.rationale,
            "feedback_text": self.feedback_text,
            "granted": self.granted,
            "grab_attempted": self.grab_attempted,
            "grab_succeeded": self.grab_succeeded,
            "pose_after": list(self.pose_after),
            "frame_ref": self.frame_ref,
            "distance_moved": self.distance_moved,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StepRecord":
        return cls(
            index=d["index"],
            room_index=d["room_index"],
            raw_action=d["raw_action"],
            parse_error=d["parse_error"],
            rationale=d["rationale"],
            feedback_text=d["feedback_text"],
            granted=list(d["granted"]),
            grab_attempted=d["grab_attempted"],
            grab_succeeded=d["grab_succeeded"],
            pose_after=tuple(d["pose_after"]),
            frame_ref=d["frame_ref"],
            distance_moved=d["distance_moved"],
        )


@dataclass
class EpisodeLog:
    scene_id: str
    seed: int
    difficulty: str
    step_limit: int
    agent: str
    required_interactions: int
    steps: list[StepRecord] = field(default_factory=list)
    outcome: str = "failed"  # "escaped" | "failed"
    acquisition_marks: dict[str, int | None] = field(
        default_factory=lambda: {"password_step": None, "key_step": None, "exit_step": None}
    )
    oracle_distance: float | None = None
    injected_prefix_steps: int = 0

    @property
    def total_steps(self) -> int:
        return len(self.steps)

    @property
    def final_room(self) -> int:
        """Index of the game's last room (prop gain is scored there).

        Derived from the difficulty label: one room per '+'-separated part.
        """
        return self.difficulty.count("+")

    def traveled_distance(self) -> float:
        return sum(s.distance_moved for s in self.steps)

    def validate(self) -> None:
        for i, s in enumerate(self.steps, start=1):
            if s.index != i:
                raise LogFormatError(f"step index {s.index} at position {i}")
            if s.grab_succeeded and not s.grab_attempted:
                raise LogFormatError(f"step {i}: grab_succeeded without grab_attempted")
        if self.outcome == "escaped" and self.acquisition_marks.get("exit_step") is None:
            raise LogFormatError("escaped log without exit_step mark")

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "kind": "meta",
                    "log_version": LOG_VERSION,
                    "scene_id": self.scene_id,
                    "seed": self.seed,
                    "difficulty": self.difficulty,
                    "step_limit": self.step_limit,
                    "agent": self.agent,
                    "required_interactions": self.required_interactions,
                    "oracle_distance": self.oracle_distance,
                    "injected_prefix_steps": self.injected_prefix_steps,
                }
            )
        ]
        lines += [json.dumps(s.to_dict()) for s in self.steps]
        lines.append(
            json.dumps(
                {
                    "kind": "end",
                    "outcome": self.outcome,
                    "total_steps": self.total_steps,
                    "acquisition_marks": self.acquisition_marks,
                }
            )
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "EpisodeLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise LogFormatError("log needs at least meta and end lines")
        meta = json.loads(lines[0])
        if meta.get("kind") != "meta":
            raise LogFormatError("first line must be the meta record")
        if meta.get("log_version") != LOG_VERSION:
            raise LogFormatError(f"unsupported log_version {meta.get('log_version')!r}")
        end = json.loads(lines[-1])
        if end.get("kind") != "end":
            raise LogFormatError("last line must be the end record")
        log = cls(
            scene_id=meta["scene_id"],
            seed=meta["seed"],
            difficulty=meta["difficulty"],
            step_limit=meta["step_limit"],
            agent=meta["agent"],
            required_interactions=meta["required_interactions"],
            oracle_distance=meta.get("oracle_distance"),
            injected_prefix_steps=meta.get("injected_prefix_steps", 0),
        )
        for ln in lines[1:-1]:
            d = json.loads(ln)
            if d.get("kind") != "step":
                raise LogFormatError("unexpected record kind between meta and end")
            log.steps.append(StepRecord.from_dict(d))
        log.outcome = end["outcome"]
        log.acquisition_marks = dict(end["acquisition_marks"])
        log.validate()
        return log

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_jsonl())

    @classmethod
    def load(cls, path) -> "EpisodeLog":
        with open(path, encoding="utf-8") as f:
            return cls.from_jsonl(f.read())


# ---------------------------------------------------------------------------
# per-episode metrics (the three interaction equations)


@dataclass
class EpisodeMetrics:
    steps: int
    escaped: bool
    attempts: int
    successes: int
    prop_gain: Fraction  # successes toward the chain / required count, capped at 1
    gsr: Fraction  # successes / attempts; 0 when undefined
    gsr_undefined: bool
    grab_ratio: Fraction  # attempts / steps
    surplus_successes: int  # successes beyond the required count


def metrics_from_counts(
    steps: int, escaped: bool, attempts: int, successes: int, successes_for_gain: int, required: int
) -> EpisodeMetrics:
    if required <= 0:
        raise ValueError("required interaction count must be positive")
    raw_gain = Fraction(successes_for_gain, required)
    surplus = max(0, successes_for_gain - required)
    undefined = attempts == 0
    return EpisodeMetrics(
        steps=steps,
        escaped=escaped,
        attempts=attempts,
        successes=successes,
        prop_gain=min(raw_gain, Fraction(1)),
        gsr=Fraction(0) if undefined else Fraction(successes, attempts),
        gsr_undefined=undefined,
        grab_ratio=Fraction(0) if steps == 0 else Fraction(attempts, steps),
        surplus_successes=surplus,
    )


def compute_episode_metrics(log: EpisodeLog, chain: PropChain) -> EpisodeMetrics:
    """Eq.-style per-episode quantities, checked against the given chain.

    For multi-room games the chain is the final room's and prop gain counts
    only interactions performed there; success/attempt tallies span the game.
    """
    log.validate()
    required = required_interaction_count(chain)
    if required != log.required_interactions:
        raise ValueError(
            f"chain/log mismatch: chain requires {required} interactions, "
            f"log recorded {log.required_interactions}"
        )
    final_room = log.final_room
    attempts = sum(1 for s in log.steps if s.grab_attempted)
    successes = sum(1 for s in log.steps if s.grab_succeeded)
    successes_for_gain = sum(
        1 for s in log.steps if s.grab_succeeded and s.room_index == final_room
    )
    return metrics_from_counts(
        log.total_steps, log.outcome == "escaped", attempts, successes, successes_for_gain, required
    )


# ---------------------------------------------------------------------------
# aggregation


@dataclass
class StageAggregate:
    name: str  # "password" | "key" | "exit"
    n: int  # episodes that reached the stage
    mean_steps: Fraction
    mean_cost: Fraction


@dataclass
class GroupAggregate:
    n: int
    escape_rate: Fraction
    mean_steps: Fraction
    mean_prop_gain: Fraction
    mean_gsr: Fraction
    mean_grab_ratio: Fraction
    gsr_undefined_count: int
    stages: list[StageAggregate] = field(default_factory=list)


@dataclass
class MetricsReport:
    groups: dict[str, GroupAggregate]
    avg_escape_rate: Fraction

    def to_dict(self) -> dict:
        return {
            "groups": {
                label: {
                    "n": g.n,
                    "escape_rate_pct": fmt_pct(g.escape_rate),
                    "mean_steps": fmt_num(g.mean_steps),
                    "mean_prop_gain_pct": fmt_pct(g.mean_prop_gain),
                    "mean_gsr_pct": fmt_pct(g.mean_gsr),
                    "mean_grab_ratio": fmt_num(g.mean_grab_ratio),
                    "gsr_undefined_count": g.gsr_undefined_count,
                    "stages": {
                        s.name: {
                            "n": s.n,
                            "mean_steps": fmt_num(s.mean_steps),
                            "mean_cost": fmt_num(s.mean_cost),
                        }
                        for s in g.stages
                    },
                }
                for label, g in self.groups.items()
            },
            "avg_escape_rate_pct": fmt_pct(self.avg_escape_rate),
        }

    def render_stage_table(self) -> str:
        """Stage step/cost means per difficulty group (password/key/exit)."""
        headers = ["Group", "Stage", "N", "Steps", "Cost"]
        rows = []
        for label, g in self.groups.items():
            for s in g.stages:
                rows.append([label, s.name, str(s.n), fmt_num(s.mean_steps), fmt_num(s.mean_cost)])
        if not rows:
            return "(no acquisition stages recorded)"
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        out.append("  ".join("-" * w for w in widths))
        for r in rows:
            out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        return "\n".join(out)

    def render_table(self) -> str:
        """Aligned text table, one row block per difficulty group plus AVG ER."""
        headers = ["Group", "N", "ER (%)", "Prop (%)", "Steps", "Grab SR (%)", "Grab Ratio"]
        rows = []
        for label, g in self.groups.items():
            prop = "-" if label == "d1" else fmt_pct(g.mean_prop_gain)
            rows.append(
                [
                    label,
                    str(g.n),
                    fmt_pct(g.escape_rate),
                    prop,
                    fmt_num(g.mean_steps),
                    fmt_pct(g.mean_gsr),
                    fmt_num(g.mean_grab_ratio),
                ]
            )
        rows.append(["AVG ER", "", fmt_pct(self.avg_escape_rate), "", "", "", ""])
        widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]
        out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        out.append("  ".join("-" * w for w in widths))
        for r in rows:
            out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        return "\n".join(out)


def fmt_pct(x: Fraction) -> str:
    return f"{float(x) * 100:.2f}"


def fmt_num(x: Fraction) -> str:
    return f"{float(x):.2f}"


def fmt_ratio3(x: Fraction) -> str:
    return f"{float(x):.3f}"


def episode_metrics_from_log(log: EpisodeLog) -> EpisodeMetrics:
    """Per-episode metrics using the required count recorded in the log."""
    final_room = log.final_room
    attempts = sum(1 for s in log.steps if s.grab_attempted)
    successes = sum(1 for s in log.steps if s.grab_succeeded)
    successes_for_gain = sum(
        1 for s in log.steps if s.grab_succeeded and s.room_index == final_room
    )
    return metrics_from_counts(
        log.total_steps,
        log.outcome == "escaped",
        attempts,
        successes,
        successes_for_gain,
        log.required_interactions,
    )


def aggregate_benchmark(groups: dict[str, list[EpisodeLog]]) -> MetricsReport:
    """Benchmark table over logs grouped by difficulty.

    Failed episodes contribute their recorded totals (the step limit) to mean
    steps; GSR-undefined episodes enter the mean as 0 and are counted.
    """
    out: dict[str, GroupAggregate] = {}
    for label, logs in groups.items():
        if not logs:
            raise ValueError(f"group {label!r} is empty")
        per = [episode_metrics_from_log(lg) for lg in logs]
        n = len(per)
        out[label] = GroupAggregate(
            n=n,
            escape_rate=Fraction(sum(1 for m in per if m.escaped), n),
            mean_steps=Fraction(sum(m.steps for m in per), n),
            mean_prop_gain=sum((m.prop_gain for m in per), Fraction(0)) / n,
            mean_gsr=sum((m.gsr for m in per), Fraction(0)) / n,
            mean_grab_ratio=sum((m.grab_ratio for m in per), Fraction(0)) / n,
            gsr_undefined_count=sum(1 for m in per if m.gsr_undefined),
            stages=aggregate_stages(logs),
        )
    avg = sum((g.escape_rate for g in out.values()), Fraction(0)) / len(out)
    return MetricsReport(groups=out, avg_escape_rate=avg)


_STAGE_ORDER = ("password", "key", "exit")


def aggregate_stages(logs: list[EpisodeLog]) -> list[StageAggregate]:
    """Mean stage steps and cost ratios over the episodes that reached each stage."""
    acc: dict[str, list[tuple[int, Fraction]]] = {}
    for lg in logs:
        for stage in stage_analysis(lg):
            acc.setdefault(stage.name, []).append((stage.steps, stage.cost))
    out = []
    for name in _STAGE_ORDER:
        if name not in acc:
            continue
        entries = acc[name]
        n = len(entries)
        out.append(
            StageAggregate(
                name=name,
                n=n,
                mean_steps=Fraction(sum(steps for steps, _ in entries), n),
                mean_cost=sum((cost for _, cost in entries), Fraction(0)) / n,
            )
        )
    return out


# ---------------------------------------------------------------------------
# stage analysis


@dataclass
class Stage:
    name: str  # "password" | "key" | "exit"
    steps: int
    cost: Fraction


def stage_analysis(log: EpisodeLog) -> list[Stage]:
    """Steps spent per acquisition stage, in acquisition order.

    The first stage counts from the episode start; each later stage counts
    from the previous acquisition; the exit stage counts from the last
    credential to the escape.  Stages absent from the chain are omitted.
    """
    marks = log.acquisition_marks
    events = [
        (name.removesuffix("_step"), step)
        for name, step in marks.items()
        if step is not None and name != "exit_step"
    ]
    events.sort(key=lambda e: e[1])
    total = log.total_steps
    if total == 0:
        return []
    stages: list[Stage] = []
    prev = 0
    for name, at in events:
        stages.append(Stage(name, at - prev, Fraction(at - prev, total)))
        prev = at
    exit_step = marks.get("exit_step")
    if exit_step is not None:
        stages.append(Stage("exit", exit_step - prev, Fraction(exit_step - prev, total)))
    return stages


# ---------------------------------------------------------------------------
# movement-distance correlation


@dataclass
class CorrelationResult:
    r: float
    n: int
    degenerate: bool  # a side had zero variance; r reported as 0


def pearson(xs: list[float], ys: list[float]) -> CorrelationResult:
    if len(xs) != len(ys):
        raise ValueError("length mismatch")
    n = len(xs)
    if n < 3:
        raise ValueError("need at least 3 paired points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx <= 0 or syy <= 0:
        return CorrelationResult(0.0, n, True)
    return CorrelationResult(sxy / math.sqrt(sxx * syy), n, False)


def movement_correlation(
    logs: list[EpisodeLog], oracle_distances: dict[str, float]
) -> CorrelationResult:
    """Pearson correlation of traveled distance vs. the oracle optimal distance."""
    xs, ys = [], []
    for lg in logs:
        if lg.scene_id not in oracle_distances:
            raise ValueError(f"no oracle distance for scene {lg.scene_id}")
        xs.append(lg.traveled_distance())
        ys.append(oracle_distances[lg.scene_id])
    return pearson(xs, ys)


# ---------------------------------------------------------------------------
# replay soundness


def replay_check(log: EpisodeLog, scene: SceneConfig) -> list[str]:
    """Re-run the raw actions through a fresh world and diff the bookkeeping.

    Returns human-readable differences; an empty list certifies the log.
    """
    from dataclasses import replace as _replace

    from .world import RUNNING, init_world, step_raw

    diffs: list[str] = []
    if scene.step_limit != log.step_limit:
        scene = _replace(scene, step_limit=log.step_limit)  # honor a run-time override
    state = init_world(scene)
    for rec in log.steps:
        if state.status != RUNNING:
            diffs.append(f"step {rec.index}: world already terminal on replay")
            break
        outcome = step_raw(state, rec.raw_action)
        if outcome.grab_attempted != rec.grab_attempted:
            diffs.append(f"step {rec.index}: grab_attempted {outcome.grab_attempted} != {rec.grab_attempted}")
        if outcome.grab_succeeded != rec.grab_succeeded:
            diffs.append(f"step {rec.index}: grab_succeeded {outcome.grab_succeeded} != {rec.grab_succeeded}")
        if outcome.feedback.text != rec.feedback_text:
            diffs.append(
                f"step {rec.index}: feedback {outcome.feedback.text!r} != {rec.feedback_text!r}"
            )
        if sorted(outcome.feedback.granted_items) != sorted(rec.granted):
            diffs.append(f"step {rec.index}: granted {outcome.feedback.granted_items} != {rec.granted}")
    replay_outcome = "escaped" if state.status == "escaped" else "failed"
    if state.status == RUNNING:
        diffs.append("replay ended while still running (log is truncated?)")
    elif replay_outcome != log.outcome:
        diffs.append(f"outcome {replay_outcome} != {log.outcome}")
    return diffs


def marks_from_steps(scene: SceneConfig, steps: list[StepRecord], outcome: str) -> dict[str, int | None]:
    """First password/key grant steps and the escape step, from grant events."""
    kind_by_id: dict[str, NodeKind] = {}
    for room in scene.rooms:
        for node in room.chain.nodes:
            kind_by_id[node.id] = node.kind
    marks: dict[str, int | None] = {"password_step": None, "key_step": None, "exit_step": None}
    for rec in steps:
        for g in rec.granted:
            kind = kind_by_id.get(g)
            if kind is NodeKind.PASSWORD and marks["password_step"] is None:
                marks["password_step"] = rec.index
            if kind is NodeKind.KEY and marks["key_step"] is None:
                marks["key_step"] = rec.index
    if outcome == "escaped":
        marks["exit_step"] = len(steps)
    return marks
