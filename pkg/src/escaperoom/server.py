"""Session service: remote agents and the human UI play through HTTP.

One session owns one episode.  Clients create a session from a scene document
or generator arguments, poll/stream observations, and post raw protocol
messages.  The world is authoritative; the client holds no game logic.  A
per-session token guards actions, and only one action may be in flight.
"""

from __future__ import annotations

import asyncio
import base64
import json
import secrets
import threading
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import PlainTextResponse, Response, StreamingResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import prompts
from .chain import required_interaction_count
from .metrics import EpisodeLog, StepRecord, marks_from_steps
from .render import Camera, render_frame
from .runner import FB_GAME_START, record_step
from .scene import SceneConfig, generate_multiroom, generate_scene, scene_from_dict
from .world import RUNNING, WorldState, init_world, step_raw


@dataclass
class Session:
    session_id: str
    token: str
    scene: SceneConfig
    state: WorldState
    feedback_text: str = FB_GAME_START
    records: list[StepRecord] = field(default_factory=list)
    frame_png: bytes = b""
    version: int = 0  # bumps on every new frame
    role: str = "human"
    lock: threading.Lock = field(default_factory=threading.Lock)

    def render(self) -> None:
        self.frame_png = render_frame(self.state, Camera(self.state.pose)).to_png_bytes()
        self.version += 1

    def observation(self) -> dict:
        pose = self.state.pose
        return {
            "session_id": self.session_id,
            "scene_id": self.scene.scene_id,
            "status": self.state.status,
            "steps_used": self.state.steps_used,
            "step_limit": self.state.step_limit,
            # numeric pose is debug-only information; the UI hides it by default
            "pose": {"x": pose.x, "z": pose.z, "yaw": pose.yaw, "pitch": pose.pitch},
            "feedback": self.feedback_text,
            "bag": self.state.inventory.describe(),
            "step_prompt": prompts.build_step_prompt(
                self.feedback_text, self.state.inventory.describe()
            ),
            "frame_b64": base64.b64encode(self.frame_png).decode("ascii"),
            "frame_header": self.frame_header(),
        }

    def frame_header(self) -> dict:
        h, w = (512, 512)
        return {
            "width": w,
            "height": h,
            "episode_id": self.session_id,
            "step_index": self.state.steps_used,
        }

    def log(self) -> EpisodeLog:
        outcome = "escaped" if self.state.status == "escaped" else "failed"
        log = EpisodeLog(
            scene_id=self.scene.scene_id,
            seed=self.scene.seed,
            difficulty=self.scene.difficulty,
            step_limit=self.scene.step_limit,
            agent=self.role,
            required_interactions=required_interaction_count(self.scene.rooms[-1].chain),
            steps=list(self.records),
            outcome=outcome,
        )
        log.acquisition_marks = marks_from_steps(self.scene, log.steps, outcome)
        return log


class CreateSessionRequest(BaseModel):
    scene: dict | None = None
    generate: dict | None = None
    role: str = "human"


class ActionRequest(BaseModel):
    raw: str


def create_app() -> FastAPI:
    app = FastAPI(title="escaperoom session service")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def get_session(session_id: str) -> Session:
        s = sessions.get(session_id)
        if s is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return s

    @app.post("/sessions")
    def create_session(req: CreateSessionRequest) -> dict:
        if (req.scene is None) == (req.generate is None):
            raise HTTPException(422, "provide exactly one of 'scene' or 'generate'")
        try:
            if req.scene is not None:
                scene = scene_from_dict(req.scene)
            else:
                g = dict(req.generate or {})
                difficulty = g.get("difficulty", "d1")
                style = g.get("style", "bedroom")
                seed = int(g.get("seed", 0))
                if "+" in difficulty:
                    first, second = difficulty.split("+", 1)
                    scene = generate_multiroom(first, second, style, seed)
                else:
                    scene = generate_scene(difficulty, style, seed)
        except Exception as e:  # noqa: BLE001 - surfaced as client error
            raise HTTPException(422, f"cannot build scene: {e}") from e
        session = Session(
            session_id=uuid.uuid4().hex,
            token=secrets.token_hex(16),
            scene=scene,
            state=init_world(scene),
            role=req.role,
        )
        session.render()
        sessions[session.session_id] = session
        return {
            "session_id": session.session_id,
            "token": session.token,
            "scene_id": scene.scene_id,
            "step_limit": scene.step_limit,
            "system_prompt": prompts.SYSTEM_PROMPT,
        }

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str) -> dict:
        s = get_session(session_id)
        return {
            "session_id": s.session_id,
            "scene_id": s.scene.scene_id,
            "status": s.state.status,
            "steps_used": s.state.steps_used,
            "step_limit": s.state.step_limit,
        }

    @app.get("/sessions/{session_id}/observation")
    def observation(session_id: str) -> dict:
        return get_session(session_id).observation()

    @app.get("/sessions/{session_id}/frame.png")
    def frame(session_id: str) -> Response:
        s = get_session(session_id)
        return Response(content=s.frame_png, media_type="image/png")

    @app.post("/sessions/{session_id}/actions")
    def act(
        session_id: str, req: ActionRequest, x_session_token: str | None = Header(default=None)
    ) -> dict:
        s = get_session(session_id)
        if x_session_token != s.token:
            raise HTTPException(403, "missing or wrong session token")
        if s.state.status != RUNNING:
            raise HTTPException(409, f"session is terminal ({s.state.status})")
        if not s.lock.acquire(blocking=False):
            raise HTTPException(409, "an action is already in flight")
        try:
            room_before = s.state.current_room
            outcome = step_raw(s.state, req.raw)
            s.feedback_text = outcome.feedback.text
            s.records.append(record_step(s.state, outcome, req.raw, room_before))
            s.render()
        finally:
            s.lock.release()
        return s.observation() | {"granted": outcome.feedback.granted_items}

    @app.get("/sessions/{session_id}/log", response_class=PlainTextResponse)
    def download_log(session_id: str) -> str:
        return get_session(session_id).log().to_jsonl()

    @app.get("/sessions/{session_id}/stream")
    async def stream(session_id: str, max_events: int | None = None) -> StreamingResponse:
        """SSE: one `frame` event per new frame, then `end` on terminal states.

        ``max_events`` bounds the number of frame events (used by tests and
        one-shot clients); browsers omit it and stream until the episode ends.
        """
        s = get_session(session_id)

        async def events():
            last = -1
            sent = 0
            while True:
                if s.version != last:
                    last = s.version
                    payload = s.frame_header() | {
                        "frame_b64": base64.b64encode(s.frame_png).decode("ascii"),
                        "status": s.state.status,
                        "feedback": s.feedback_text,
                        "bag": s.state.inventory.describe(),
                    }
                    yield f"event: frame\ndata: {json.dumps(payload)}\n\n"
                    sent += 1
                    if s.state.status != RUNNING:
                        yield f"event: end\ndata: {json.dumps({'status': s.state.status})}\n\n"
                        return
                    if max_events is not None and sent >= max_events:
                        return
                await asyncio.sleep(0.05)

        return StreamingResponse(events(), media_type="text/event-stream")

    return app


def serve_sessions(host: str = "127.0.0.1", port: int = 8000, ui_dir: str | None = None):
    """Run the service (blocking).  ``ui_dir`` optionally serves the web client."""
    import uvicorn

    app = create_app()
    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    uvicorn.run(app, host=host, port=port)
