from __future__ import annotations

import json

import pytest

from escaperoom import prompts
from escaperoom.agents import AgentFailure, Observation, OracleAgent, RandomAgent, ReplayAgent
from escaperoom.metrics import replay_check
from escaperoom.runner import EpisodeAborted, RunSpec, run_batch, run_episode
from escaperoom.scene import generate_multiroom, generate_scene


class TestRunEpisode:
    def test_inert_agent_fails_at_exact_limit(self, d1_scene):
        log = run_episode(d1_scene, ReplayAgent([], name="inert"), limit=12)
        assert log.outcome == "failed"
        assert log.total_steps == 12
        assert all(not s.grab_attempted for s in log.steps)

    def test_oracle_escapes_and_replays(self, d2_scene):
        log = run_episode(d2_scene, OracleAgent(d2_scene))
        assert log.outcome == "escaped"
        assert replay_check(log, d2_scene) == []

    def test_logs_are_byte_deterministic(self, d2_scene):
        a = run_episode(d2_scene, RandomAgent(7)).to_jsonl()
        b = run_episode(d2_scene, RandomAgent(7)).to_jsonl()
        assert a == b

    def test_budget_never_exceeded(self, d1_scene):
        for seed in range(3):
            log = run_episode(d1_scene, RandomAgent(seed, grab_prob=0.05))
            assert log.total_steps <= d1_scene.step_limit

    def test_first_observation_has_start_feedback(self, d1_scene):
        seen = []

        class Probe:
            name = "probe"

            def start_episode(self, system_prompt, history=None):
                seen.append(("system", system_prompt))

            def observe(self, obs):
                seen.append(("obs", obs))
                return "{}"

            def end_episode(self, outcome):
                seen.append(("end", outcome))

        run_episode(d1_scene, Probe(), limit=1)
        assert seen[0] == ("system", prompts.SYSTEM_PROMPT)
        first = seen[1][1]
        assert "You are at the starting position of the room." in first.step_prompt
        assert "The items in your bag usable include:" in first.step_prompt
        assert "(empty)" in first.bag_description
        assert seen[-1] == ("end", "failed")

    def test_frames_written_when_requested(self, d1_scene, tmp_path):
        run_episode(
            d1_scene, OracleAgent(d1_scene), render_frames=True, frames_dir=str(tmp_path)
        )
        frames = sorted(tmp_path.iterdir())
        assert frames and frames[0].name == "step_0001.png"
        assert frames[0].read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_agent_failure_aborts_with_partial_log(self, d1_scene):
        class Dying:
            name = "dying"

            def start_episode(self, system_prompt, history=None):
                pass

            def observe(self, obs):
                if obs.steps_used >= 2:
                    raise AgentFailure("endpoint exploded")
                return "{}"

            def end_episode(self, outcome):
                pass

        with pytest.raises(EpisodeAborted) as err:
            run_episode(d1_scene, Dying())
        assert err.value.partial.total_steps == 2


class TestHistoryInjection:
    def test_multiroom_bootstrap(self):
        scene = generate_multiroom("d1", "d1", "bedroom", 1)
        full = run_episode(scene, OracleAgent(scene))
        assert full.outcome == "escaped"
        # split the oracle transcript at the room transition
        cut = next(
            i for i, s in enumerate(full.steps, start=1) if s.feedback_text == prompts.FB_NEXT_ROOM
        )
        prefix = [s.raw_action for s in full.steps[:cut]]

        seen_history: list = []

        class Probe:
            name = "probe"

            def start_episode(self, system_prompt, history=None):
                seen_history.append(history)

            def observe(self, obs):
                return "{}"

            def end_episode(self, outcome):
                pass

        log = run_episode(scene, Probe(), limit=cut + 2, history_prefix=prefix)
        assert log.injected_prefix_steps == cut
        assert seen_history[0] is not None and len(seen_history[0]) == 2 * cut
        assert seen_history[0][1]["content"] == prefix[0]
        # world already advanced into room 2 when the agent takes over
        assert log.steps[cut].room_index == 1

    def test_injected_steps_count_toward_budget(self):
        scene = generate_multiroom("d1", "d1", "bedroom", 1)
        full = run_episode(scene, OracleAgent(scene))
        prefix = [s.raw_action for s in full.steps[:3]]
        log = run_episode(scene, ReplayAgent([], name="inert"), limit=5, history_prefix=prefix)
        assert log.total_steps == 5


class TestRunBatch:
    def test_batch_writes_logs_and_distances(self, tmp_path):
        scenes = [generate_scene("d1", "bedroom", s) for s in (0, 1)]
        spec = RunSpec(
            scenes=scenes,
            agent_factory=lambda sc: OracleAgent(sc),
            output_dir=str(tmp_path),
        )
        result = run_batch(spec)
        assert len(result.logs) == 2 and result.aborted == 0
        for log in result.logs:
            assert log.oracle_distance is not None
            path = tmp_path / f"{log.scene_id}.oracle.jsonl"
            assert path.exists()

    def test_aborted_counted_separately(self, tmp_path):
        scenes = [generate_scene("d1", "bedroom", 0)]

        class Dying:
            name = "dying"

            def start_episode(self, system_prompt, history=None):
                raise AgentFailure("no endpoint")

            def observe(self, obs):
                return "{}"

            def end_episode(self, outcome):
                pass

        result = run_batch(RunSpec(scenes=scenes, agent_factory=lambda sc: Dying()))
        assert result.aborted == 1 and not result.logs

    def test_parallel_batch_matches_serial(self):
        scenes = [generate_scene("d1", "bedroom", s) for s in range(4)]
        serial = run_batch(RunSpec(scenes=scenes, agent_factory=lambda sc: OracleAgent(sc)))
        parallel = run_batch(
            RunSpec(scenes=scenes, agent_factory=lambda sc: OracleAgent(sc), workers=4)
        )
        a = sorted(lg.to_jsonl() for lg in serial.logs)
        b = sorted(lg.to_jsonl() for lg in parallel.logs)
        assert a == b
