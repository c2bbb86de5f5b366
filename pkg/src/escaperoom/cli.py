"""Command-line surface: generate, validate, run, report, judge, debrief, serve, replay."""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys

from .agents import OracleAgent, RandomAgent, RemoteAgent
from .judge import RemoteJudgeClient, ScriptedPlayer, StubJudge, compute_cio, run_debriefing
from .metrics import EpisodeLog, aggregate_benchmark, fmt_ratio3, movement_correlation, replay_check
from .planner import plan_escape
from .runner import RunSpec, run_batch
from .scene import (
    SceneConfig,
    generate_multiroom,
    generate_scene,
    load_scene,
    save_scene,
    validate_solvable,
)

JUDGE_ENDPOINT_ENV = "ESCAPEROOM_JUDGE_ENDPOINT"


def parse_seeds(spec: str) -> list[int]:
    """"0..10" (inclusive), "3", or "1,4,9"."""
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    if "," in spec:
        return [int(s) for s in spec.split(",") if s]
    return [int(spec)]


def build_scenes(difficulty: str, style: str, seeds: list[int]) -> list[SceneConfig]:
    scenes = []
    for seed in seeds:
        if "+" in difficulty:
            first, second = difficulty.split("+", 1)
            scenes.append(generate_multiroom(first, second, style, seed))
        else:
            scenes.append(generate_scene(difficulty, style, seed))
    return scenes


def collect_logs(patterns: list[str]) -> list[EpisodeLog]:
    paths: list[str] = []
    for pat in patterns:
        if os.path.isdir(pat):
            paths += sorted(glob.glob(os.path.join(pat, "**", "*.jsonl"), recursive=True))
        else:
            paths += sorted(glob.glob(pat))
    if not paths:
        raise SystemExit(f"no logs match {patterns}")
    return [EpisodeLog.load(p) for p in paths]


def find_scene(scene_id: str, scene_dirs: list[str]) -> SceneConfig:
    for d in scene_dirs:
        path = os.path.join(d, f"{scene_id}.json")
        if os.path.exists(path):
            return load_scene(path)
    raise SystemExit(f"scene file {scene_id}.json not found under {scene_dirs}")


def make_agent_factory(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "oracle":
        return lambda scene: OracleAgent(scene)
    if kind == "random":
        seed = int(arg) if arg else 0
        return lambda scene: RandomAgent(seed)
    if kind == "remote":
        return lambda scene: RemoteAgent(endpoint=arg)
    raise SystemExit(f"unknown agent spec {spec!r} (oracle | random[:seed] | remote[:url])")


def make_judge(args) -> object:
    if getattr(args, "endpoint", None):
        return RemoteJudgeClient(args.endpoint)
    env = os.environ.get(JUDGE_ENDPOINT_ENV)
    if env and not getattr(args, "stub", False):
        return RemoteJudgeClient(env)
    if getattr(args, "rules", None):
        return StubJudge.from_rules_file(args.rules)
    return StubJudge()


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for scene in build_scenes(args.difficulty, args.style, parse_seeds(args.seeds)):
        path = os.path.join(args.out, f"{scene.scene_id}.json")
        save_scene(scene, path)
        print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    failures = 0
    for path in args.scenes:
        scene = load_scene(path)
        report = validate_solvable(scene)
        if report.ok:
            print(
                f"OK   {scene.scene_id}: oracle escapes in {report.oracle_steps} steps, "
                f"path {report.oracle_path_length:.2f} m"
            )
        else:
            failures += 1
            print(f"FAIL {scene.scene_id}: " + "; ".join(report.violations))
    return 1 if failures else 0


def cmd_run(args) -> int:
    if args.scene:
        scenes = [load_scene(p) for p in args.scene]
    else:
        scenes = build_scenes(args.difficulty, args.style, parse_seeds(args.seeds))
    os.makedirs(args.out, exist_ok=True)
    scenes_dir = os.path.join(args.out, "scenes")
    os.makedirs(scenes_dir, exist_ok=True)
    for scene in scenes:
        save_scene(scene, os.path.join(scenes_dir, f"{scene.scene_id}.json"))
    history = []
    if args.history:
        history = [rec.raw_action for rec in EpisodeLog.load(args.history).steps]
    spec = RunSpec(
        scenes=scenes,
        agent_factory=make_agent_factory(args.agent),
        output_dir=os.path.join(args.out, "logs"),
        step_limit=args.limit,
        render_frames=args.render,
        history_prefix=history,
        workers=args.workers,
    )
    result = run_batch(spec)
    for log in result.logs:
        print(f"{log.scene_id}: {log.outcome} in {log.total_steps} steps")
    if result.aborted:
        print(f"aborted episodes: {result.aborted}", file=sys.stderr)
        for reason in result.abort_reasons:
            print(f"  {reason}", file=sys.stderr)
    return 0 if not result.aborted else 2


def cmd_report(args) -> int:
    logs = collect_logs(args.logs)
    groups: dict[str, list[EpisodeLog]] = {}
    for lg in logs:
        groups.setdefault(lg.difficulty, []).append(lg)
    report = aggregate_benchmark(groups)
    print(report.render_table())
    stage_table = report.render_stage_table()
    if "no acquisition stages" not in stage_table:
        print("\nStage analysis (mean steps / mean cost):")
        print(stage_table)
    if all(lg.oracle_distance is not None for lg in logs) and len(logs) >= 3:
        corr = movement_correlation(
            logs, {lg.scene_id: lg.oracle_distance for lg in logs}
        )
        note = " (degenerate variance)" if corr.degenerate else ""
        print(f"\nmoving-distance correlation vs optimal: {corr.r:.3f} over {corr.n} episodes{note}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as f:
            json.dump(report.to_dict(), f, indent=2)
        print(f"wrote {args.json}")
    return 0


def cmd_judge(args) -> int:
    client = make_judge(args)
    logs = collect_logs(args.logs)
    total_eval = total_excl = 0
    scores = []
    for lg in logs:
        result = compute_cio(lg, client)
        total_eval += result.n_evaluated
        total_excl += result.n_excluded
        if result.c_io is None:
            print(f"{lg.scene_id} [{lg.agent}]: C_IO undefined (no successful interactions)")
        else:
            scores.append(result.c_io)
            print(
                f"{lg.scene_id} [{lg.agent}]: C_IO {result.c_io:.4f} "
                f"({result.n_evaluated} judged, {result.n_excluded} excluded)"
            )
    if scores:
        print(f"mean C_IO: {sum(scores) / len(scores):.4f} over {len(scores)} episodes")
    print(f"replies judged: {total_eval}, excluded as unusable: {total_excl}")
    return 0


def cmd_debrief(args) -> int:
    client = make_judge(args)
    logs = [lg for lg in collect_logs(args.logs) if lg.outcome == "escaped"]
    if not logs:
        print("no escaped episodes to debrief")
        return 0
    scores = []
    for lg in logs:
        scene = find_scene(lg.scene_id, args.scenes)
        kind, _, url = args.player.partition(":")
        if kind == "echo":
            player = ScriptedPlayer(scene.story_text)
        elif kind == "empty":
            player = ScriptedPlayer("")
        elif kind == "remote":
            from .agents import AGENT_ENDPOINT_ENV
            from .judge import RemoteDebriefPlayer

            endpoint = url or os.environ.get(AGENT_ENDPOINT_ENV, "")
            if not endpoint:
                raise SystemExit("remote player needs an endpoint (remote:URL or env var)")
            player = RemoteDebriefPlayer(endpoint)
        else:
            raise SystemExit(f"unknown player {args.player!r} (echo | empty | remote[:url])")
        result = run_debriefing(lg, scene, player, client)
        if result.score is None:
            print(f"{lg.scene_id}: unusable judge reply {result.unusable_reply!r}")
        else:
            scores.append(result.score)
            print(f"{lg.scene_id}: score {result.score:g}")
    if scores:
        print(f"Average Score: {sum(scores) / len(scores):.2f} over {len(scores)} episodes")
    return 0


def cmd_serve(args) -> int:
    from .server import serve_sessions

    serve_sessions(args.host, args.port, ui_dir=args.ui)
    return 0


def cmd_replay(args) -> int:
    log = EpisodeLog.load(args.log)
    scene = load_scene(args.scene) if args.scene else find_scene(log.scene_id, args.scenes)
    diffs = replay_check(log, scene)
    if diffs:
        print(f"{len(diffs)} difference(s):")
        for d in diffs:
            print(f"  {d}")
        return 1
    print(f"OK: {log.scene_id} replays cleanly ({log.total_steps} steps, {log.outcome})")
    return 0


def cmd_oracle(args) -> int:
    scene = load_scene(args.scene)
    plan = plan_escape(scene)
    print(
        f"{scene.scene_id}: escaped={plan.escaped} steps={plan.steps} "
        f"path={fmt_ratio3(plan.path_length) if plan.path_length else plan.path_length} m"
    )
    for raw in plan.actions:
        print(raw)
    return 0 if plan.escaped else 1


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="escaperoom", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate scene files")
    p.add_argument("--difficulty", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--seeds", required=True, help='e.g. "0..10", "7", "1,2,5"')
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="solvability report for scene files")
    p.add_argument("scenes", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run episodes")
    p.add_argument("--scene", action="append", help="scene file (repeatable)")
    p.add_argument("--difficulty")
    p.add_argument("--style")
    p.add_argument("--seeds")
    p.add_argument("--agent", default="oracle")
    p.add_argument("--out", required=True)
    p.add_argument("--limit", type=int)
    p.add_argument("--render", action="store_true")
    p.add_argument("--history", help="log file whose actions seed the episode")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="aggregate benchmark table over logs")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--json")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("judge", help="intent-outcome consistency over logs")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--stub", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--rules")
    p.set_defaults(func=cmd_judge)

    p = sub.add_parser("debrief", help="post-game story recovery scoring")
    p.add_argument("--logs", nargs="+", required=True)
    p.add_argument("--scenes", nargs="+", required=True)
    p.add_argument("--player", default="echo")
    p.add_argument("--stub", action="store_true")
    p.add_argument("--endpoint")
    p.add_argument("--rules")
    p.set_defaults(func=cmd_debrief)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui", help="directory with the web client to serve at /")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-run a log's actions and diff the flags")
    p.add_argument("--log", required=True)
    p.add_argument("--scene")
    p.add_argument("--scenes", nargs="*", default=[])
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("oracle", help="print the oracle's action transcript for a scene")
    p.add_argument("scene")
    p.set_defaults(func=cmd_oracle)

    args = ap.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
