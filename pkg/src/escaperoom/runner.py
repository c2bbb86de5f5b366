"""End-to-end episode execution and batch runs.

One episode is the loop: render the observation, assemble the step prompt
(previous interaction result, bag contents, action-format reminder), collect
the agent's raw message, apply it through the world, log the step.  Logs are
deterministic given the scene and a scripted agent; frames are rendered only
on request so headless validation stays fast.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import prompts
from .agents import AgentEndpoint, AgentFailure, Observation
from .chain import required_interaction_count
from .metrics import EpisodeLog, StepRecord, marks_from_steps
from .render import Camera, render_frame
from .scene import SceneConfig
from .world import RUNNING, init_world, step_raw

FB_GAME_START = "You are at the starting position of the room."


class EpisodeAborted(RuntimeError):
    """Agent endpoint failure; carries the partial log for inspection."""

    def __init__(self, message: str, partial: EpisodeLog):
        super().__init__(message)
        self.partial = partial


@dataclass
class RunSpec:
    """Batch description: which scenes, which agent, where the output goes."""

    scenes: list[SceneConfig]
    agent_factory: object  # callable scene -> AgentEndpoint
    output_dir: str | None = None
    step_limit: int | None = None  # overrides the per-scene default
    render_frames: bool = False
    history_prefix: list[str] = field(default_factory=list)
    workers: int = 1


def _history_turns(prefix_records: list[StepRecord]) -> list[dict]:
    """Injected trajectory as pre-seeded conversation turns."""
    turns: list[dict] = []
    for rec in prefix_records:
        turns.append({"role": "user", "content": prompts.build_step_prompt("(history)", "(history)")})
        turns.append({"role": "assistant", "content": rec.raw_action})
    return turns


def run_episode(
    scene: SceneConfig,
    agent: AgentEndpoint,
    limit: int | None = None,
    render_frames: bool = False,
    frames_dir: str | None = None,
    history_prefix: list[str] | None = None,
    oracle_distance: float | None = None,
) -> EpisodeLog:
    """Run one full episode; returns a replay-sound log.

    ``history_prefix`` raw actions are applied to the world first and recorded
    as injected steps; the agent then continues with those turns already in
    its conversation history (the bootstrapped multi-room protocol).
    """
    if limit is not None:
        scene = replace(scene, step_limit=limit)
    state = init_world(scene)
    log = EpisodeLog(
        scene_id=scene.scene_id,
        seed=scene.seed,
        difficulty=scene.difficulty,
        step_limit=scene.step_limit,
        agent=getattr(agent, "name", agent.__class__.__name__),
        required_interactions=required_interaction_count(scene.rooms[-1].chain),
        oracle_distance=oracle_distance,
    )

    feedback_text = FB_GAME_START
    for raw in history_prefix or []:
        if state.status != RUNNING:
            break  # an over-long prefix must not overrun the episode
        room_before = state.current_room
        outcome = step_raw(state, raw)
        feedback_text = outcome.feedback.text
        log.steps.append(record_step(state, outcome, raw, room_before))
    log.injected_prefix_steps = len(log.steps)

    try:
        agent.start_episode(prompts.SYSTEM_PROMPT, history=_history_turns(log.steps))
    except AgentFailure as e:
        raise EpisodeAborted(str(e), log) from e

    if frames_dir:
        os.makedirs(frames_dir, exist_ok=True)

    while state.status == RUNNING:
        frame_ref = f"step_{state.steps_used + 1:04d}.png"
        frame_png = None
        if render_frames:
            frame = render_frame(state, Camera(state.pose))
            frame_png = frame.to_png_bytes()
            if frames_dir:
                with open(os.path.join(frames_dir, frame_ref), "wb") as f:
                    f.write(frame_png)
        observation = Observation(
            step_prompt=prompts.build_step_prompt(feedback_text, state.inventory.describe()),
            feedback_text=feedback_text,
            bag_description=state.inventory.describe(),
            steps_used=state.steps_used,
            step_limit=state.step_limit,
            frame_png=frame_png,
            frame_ref=frame_ref,
        )
        try:
            raw = agent.observe(observation)
        except AgentFailure as e:
            raise EpisodeAborted(str(e), log) from e
        room_before = state.current_room
        outcome = step_raw(state, raw)
        feedback_text = outcome.feedback.text
        log.steps.append(record_step(state, outcome, raw, room_before))

    log.outcome = "escaped" if state.status == "escaped" else "failed"
    log.acquisition_marks = marks_from_steps(scene, log.steps, log.outcome)
    agent.end_episode(log.outcome)
    log.validate()
    return log


def record_step(state, outcome, raw: str, room_before: int) -> StepRecord:
    action = outcome.action
    return StepRecord(
        index=state.steps_used,
        room_index=room_before,
        raw_action=raw,
        parse_error=outcome.parse_error,
        rationale=action.rationale if action is not None else "",
        feedback_text=outcome.feedback.text,
        granted=list(outcome.feedback.granted_items),
        grab_attempted=outcome.grab_attempted,
        grab_succeeded=outcome.grab_succeeded,
        pose_after=(state.pose.x, state.pose.z, state.pose.yaw, state.pose.pitch),
        frame_ref=outcome.feedback.frame_ref + ".png",
        distance_moved=outcome.distance_moved,
    )


@dataclass
class BatchResult:
    logs: list[EpisodeLog]
    aborted: int = 0
    abort_reasons: list[str] = field(default_factory=list)


def run_batch(spec: RunSpec) -> BatchResult:
    """Run every scene in the spec; aborted episodes are counted, not scored."""

    def one(scene: SceneConfig) -> EpisodeLog:
        from .planner import plan_escape

        agent = spec.agent_factory(scene)  # type: ignore[operator]
        frames_dir = None
        if spec.output_dir and spec.render_frames:
            frames_dir = os.path.join(spec.output_dir, "frames", scene.scene_id)
        oracle_plan = plan_escape(scene)
        log = run_episode(
            scene,
            agent,
            limit=spec.step_limit,
            render_frames=spec.render_frames,
            frames_dir=frames_dir,
            history_prefix=spec.history_prefix or None,
            oracle_distance=oracle_plan.path_length if oracle_plan.escaped else None,
        )
        if spec.output_dir:
            os.makedirs(spec.output_dir, exist_ok=True)
            log.save(os.path.join(spec.output_dir, f"{scene.scene_id}.{log.agent}.jsonl"))
        return log

    result = BatchResult(logs=[])
    if spec.workers <= 1:
        for scene in spec.scenes:
            try:
                result.logs.append(one(scene))
            except EpisodeAborted as e:
                result.aborted += 1
                result.abort_reasons.append(str(e))
        return result
    with ThreadPoolExecutor(max_workers=spec.workers) as pool:
        futures = [pool.submit(one, s) for s in spec.scenes]
        for fut in futures:
            try:
                result.logs.append(fut.result())
            except EpisodeAborted as e:
                result.aborted += 1
                result.abort_reasons.append(str(e))
    return result
