"""Interactive tuning server wrapped around the simulation engine.

HTTP endpoints expose the live scene, the cost-field layers, scene edits,
parameter changes, and transport control; a websocket pushes one frame per
tick. The engine is owned by a single event loop: manual steps run inline,
play-mode ticks run in a worker thread guarded by a stepping flag, and every
mutation lands at a tick boundary. Edits that arrive while a tick is in
flight are refused with 409 so the client can retry.
"""

from __future__ import annotations

import asyncio
import dataclasses
import time as wallclock
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from ..nav import build_cost_field
from ..scene import RobotState, SceneSnapshot
from .engine import DT, Engine
from .scenario import ScenarioScript

_EDIT_FIELDS = {
    "add": {"agent", "pos"},
    "move": {"agent", "pos"},
    "remove": {"agent"},
    "set_orientation": {"agent", "orientation"},
    "set_seated": {"agent", "seated"},
    "set_speaking": {"agent", "speaking"},
    "move_goal": {"goal"},
}
_EDIT_OPTIONAL = {
    "add": {"orientation", "seated", "speaking", "appearance_seed", "voice_seed"},
}

FIELD_LAYERS = ("social", "obstacle", "total")


def _check_xy(value, name: str) -> None:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        raise ValueError(f"{name} must be a [x, y] pair of numbers")


def validate_edit(edit: dict, known_agents: set[str]) -> None:
    """Raise ValueError describing the first problem with an edit request."""
    if not isinstance(edit, dict):
        raise ValueError("edit must be a JSON object")
    op = edit.get("op")
    if op not in _EDIT_FIELDS:
        raise ValueError(f"unknown edit op {op!r}")
    required = _EDIT_FIELDS[op]
    allowed = {"op"} | required | _EDIT_OPTIONAL.get(op, set())
    missing = sorted(required - set(edit))
    if missing:
        raise ValueError(f"edit {op} is missing fields {missing}")
    extra = sorted(set(edit) - allowed)
    if extra:
        raise ValueError(f"edit {op} has unexpected fields {extra}")
    if "pos" in edit:
        _check_xy(edit["pos"], "pos")
    if "goal" in edit:
        _check_xy(edit["goal"], "goal")
    if "orientation" in edit and not isinstance(edit["orientation"], (int, float)):
        raise ValueError("orientation must be a number")
    for flag in ("seated", "speaking"):
        if flag in edit and op != "add" and not isinstance(edit[flag], bool):
            raise ValueError(f"{flag} must be a boolean")
    agent = edit.get("agent")
    if op == "add":
        if not isinstance(agent, str) or not agent:
            raise ValueError("agent must be a non-empty string")
        if agent in known_agents:
            raise ValueError(f"agent {agent!r} already exists")
    elif "agent" in required and agent not in known_agents:
        raise ValueError(f"no agent named {agent!r}")


class Playground:
    """Engine owner: serializes ticks, edits, and parameter changes."""

    def __init__(self, script: ScenarioScript):
        self.script = script
        self.engine = Engine(script)
        self.entries: list[dict] = []
        self.playing = False
        self._stepping = False
        self._play_task: Optional[asyncio.Task] = None
        self._subscribers: list[asyncio.Queue] = []
        self._broadcast_version: Optional[int] = None

    # -- state snapshots -------------------------------------------------

    def _truth_agents(self) -> list[dict]:
        now = self.engine.time
        out = []
        for agent in self.engine.agents:
            truth = agent.truth_at(now)
            out.append(
                {
                    "id": truth.id,
                    "pos": [truth.pos[0], truth.pos[1]],
                    "orientation": truth.orientation,
                    "seated": truth.seated,
                    "speaking": truth.speaking,
                }
            )
        return out

    def scene(self) -> dict:
        engine = self.engine
        last = engine.last_entry
        return {
            "tick": engine.tick,
            "time": engine.time,
            "playing": self.playing,
            "scenario": {
                "name": self.script.name,
                "map": self.script.raw.get("map"),
                "seed": engine.seed,
                "duration": self.script.duration,
            },
            "robot": {
                "pose": list(engine.robot_pose),
                "goal": None if engine.goal is None else list(engine.goal),
                "mode": self.script.robot.mode,
                "speaking": engine.robot_speaking,
            },
            "agents": self._truth_agents(),
            "persons": last["partition"]["persons"] if last else [],
            "tracks": last["tracks"] if last else [],
            "groups": last["groups"] if last else [],
            "plan": last["plan"] if last else None,
            "supervisor": (
                last["supervisor"] if last else {"phase": "idle", "target": None, "actions": []}
            ),
            "field_version": engine.field_version,
            "stop_events": engine.stop_events,
        }

    def _field(self):
        field = self.engine.field
        if field is not None:
            return field
        empty = SceneSnapshot(
            time=self.engine.time, robot=RobotState(pose=self.engine.robot_pose)
        )
        return build_cost_field(empty, self.script.grid, self.engine.social_params)

    def field_payload(self, layer: str) -> dict:
        field = self._field()
        grid = field.grid
        values = getattr(field, layer) if layer != "total" else field.total
        return {
            "layer": layer,
            "nx": grid.nx,
            "ny": grid.ny,
            "resolution": grid.resolution,
            "origin": list(grid.origin),
            "version": self.engine.field_version,
            "values": [float(v) for v in values.ravel()],
        }

    def status(self) -> dict:
        return {
            "tick": self.engine.tick,
            "time": self.engine.time,
            "playing": self.playing,
            "stop_events": self.engine.stop_events,
            "field_version": self.engine.field_version,
        }

    # -- mutations (all at tick boundaries) -------------------------------

    def guard(self) -> None:
        if self._stepping:
            raise HTTPException(status_code=409, detail="tick in flight, retry")

    def queue_edit(self, edit: dict) -> None:
        known = {a.id for a in self.engine.agents}
        for pending in self.engine._pending_edits:
            if pending["op"] == "add":
                known.add(pending["agent"])
            elif pending["op"] == "remove":
                known.discard(pending["agent"])
        try:
            validate_edit(edit, known)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        self.engine.queue_edit(edit)

    def update_params(self, body: dict) -> dict:
        if not isinstance(body, dict) or not set(body) <= {"social", "weights"}:
            raise HTTPException(
                status_code=400, detail="params accepts 'social' and 'weights' objects"
            )
        try:
            if "social" in body:
                self.engine.social_params = dataclasses.replace(
                    self.engine.social_params, **body["social"]
                )
            if "weights" in body:
                self.engine.weights = dataclasses.replace(
                    self.engine.weights, **body["weights"]
                )
        except (TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "social": dataclasses.asdict(self.engine.social_params),
            "weights": dataclasses.asdict(self.engine.weights),
        }

    def _do_tick(self) -> dict:
        self._stepping = True
        try:
            entry = self.engine.tick_once()
        finally:
            self._stepping = False
        self.entries.append(entry)
        return entry

    def frame_payload(self, include_field: bool) -> dict:
        frame = self.scene()
        if include_field:
            frame["field"] = self.field_payload("total")
        return frame

    def _broadcast(self) -> None:
        """Push one frame per tick; attach the field only when it changed.

        The field payload is captured here, at the tick boundary, so a slow
        websocket consumer never sees a frame paired with a newer field.
        """
        version = self.engine.field_version
        frame = self.frame_payload(include_field=version != self._broadcast_version)
        self._broadcast_version = version
        for queue in list(self._subscribers):
            queue.put_nowait(frame)

    def step(self, steps: int = 1) -> dict:
        for _ in range(steps):
            self._do_tick()
            self._broadcast()
        return self.status()

    def reset(self, seed: Optional[int] = None) -> dict:
        self.engine.reset(seed)
        self.entries = []
        self._broadcast_version = None
        self._broadcast()
        return self.status()

    async def _play_loop(self) -> None:
        while self.playing:
            started = wallclock.monotonic()
            await asyncio.to_thread(self._do_tick)
            self._broadcast()
            elapsed = wallclock.monotonic() - started
            await asyncio.sleep(max(0.0, DT - elapsed))

    def play(self) -> dict:
        if not self.playing:
            self.playing = True
            self._play_task = asyncio.get_running_loop().create_task(self._play_loop())
        return self.status()

    async def pause(self) -> dict:
        self.playing = False
        if self._play_task is not None:
            try:
                await self._play_task
            except asyncio.CancelledError:
                pass
            self._play_task = None
        return self.status()

    def subscribe(self) -> asyncio.Queue:
        queue: asyncio.Queue = asyncio.Queue()
        self._subscribers.append(queue)
        return queue

    def unsubscribe(self, queue: asyncio.Queue) -> None:
        if queue in self._subscribers:
            self._subscribers.remove(queue)


def create_app(script: ScenarioScript) -> FastAPI:
    app = FastAPI(title="social scene playground")
    # the browser UI is served statically from another port, so the API
    # must answer cross-origin requests
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    pg = Playground(script)
    app.state.playground = pg

    @app.get("/scene")
    async def get_scene() -> dict:
        return pg.scene()

    @app.get("/field")
    async def get_field(layer: str = Query("total")) -> dict:
        if layer not in FIELD_LAYERS:
            raise HTTPException(
                status_code=400, detail=f"layer must be one of {FIELD_LAYERS}"
            )
        return pg.field_payload(layer)

    @app.post("/edit")
    async def post_edit(edit: dict) -> dict:
        pg.guard()
        pg.queue_edit(edit)
        return {"queued": True, "applies_at_tick": pg.engine.tick}

    @app.post("/params")
    async def post_params(body: dict) -> dict:
        pg.guard()
        return pg.update_params(body)

    @app.post("/control")
    async def post_control(body: dict) -> dict:
        action = body.get("action")
        if action == "play":
            return pg.play()
        if action == "pause":
            return await pg.pause()
        if action == "step":
            pg.guard()
            steps = body.get("steps", 1)
            if not isinstance(steps, int) or steps < 1:
                raise HTTPException(status_code=400, detail="steps must be a positive int")
            return pg.step(steps)
        if action == "reset":
            pg.guard()
            seed = body.get("seed")
            if seed is not None and not isinstance(seed, int):
                raise HTTPException(status_code=400, detail="seed must be an int")
            return pg.reset(seed)
        raise HTTPException(
            status_code=400, detail="action must be play, pause, step, or reset"
        )

    @app.websocket("/stream")
    async def stream(ws: WebSocket) -> None:
        await ws.accept()
        queue = pg.subscribe()
        try:
            await ws.send_json(pg.frame_payload(include_field=True))
            while True:
                await ws.send_json(await queue.get())
        except WebSocketDisconnect:
            pass
        finally:
            pg.unsubscribe(queue)

    return app


def serve(script: ScenarioScript, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Blocking entry point used by the CLI."""
    import uvicorn

    uvicorn.run(create_app(script), host=host, port=port, log_level="info")
