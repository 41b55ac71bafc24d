"""Closed-loop simulation engine.

Each 10 Hz tick: advance scripted agents, emit virtual sensor observations,
step the tracker, resolve the feature partition into persons, detect
conversational groups, build the cost field, step the interaction
supervisor, plan, and apply the first control. Every stage lands in a
JSON-ready tick log so runs replay byte-identically.

Scene edits (from the playground) queue up and apply at tick boundaries,
never mid-tick.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from ..association import MatchCandidate, PersonManager
from ..groups import detect_groups
from ..nav import SocialCostParams, build_cost_field, forward_model, plan, rollout_cost
from ..nav.planner import NoFeasiblePlan, PlannerWeights
from ..scene import BodyObservation, RobotState, SceneSnapshot
from ..supervisor import SupervisorParams, initial_state
from ..supervisor import step as supervisor_step
from ..tracker import Tracker
from .scenario import AgentScript, ScenarioScript
from .sensors import AgentTruth, CountingRng, SensorFrame, VirtualSensors, face_body_likelihoods

DT = 0.1
GOAL_TOLERANCE = 0.3


@dataclass
class RuntimeAgent:
    """Scripted agent plus live overrides from interactive edits."""

    id: str
    script: Optional[AgentScript] = None
    pos: Optional[tuple[float, float]] = None
    orientation: Optional[float] = None
    seated: Optional[bool] = None
    speaking: Optional[bool] = None

    def truth_at(self, t: float) -> AgentTruth:
        if self.pos is not None:
            base_pos, velocity = self.pos, (0.0, 0.0)
        elif self.script is not None:
            base_pos, velocity = self.script.position(t), self.script.velocity(t)
        else:
            base_pos, velocity = (0.0, 0.0), (0.0, 0.0)
        if self.orientation is not None:
            orientation = self.orientation
        elif self.script is not None:
            orientation = self.script.heading(t)
        else:
            orientation = 0.0
        seated = self.seated if self.seated is not None else (
            self.script.seated if self.script else False
        )
        speaking = self.speaking if self.speaking is not None else (
            self.script.speaking(t) if self.script else False
        )
        return AgentTruth(
            id=self.id, pos=base_pos, velocity=velocity, orientation=orientation,
            seated=seated, speaking=speaking,
        )


def _f(x) -> float:
    return float(x)


def _xy(p) -> list[float]:
    return [float(p[0]), float(p[1])]


class Engine:
    """Owns all mutable pipeline state for one scenario run."""

    def __init__(
        self,
        script: ScenarioScript,
        seed: Optional[int] = None,
        social_params: Optional[SocialCostParams] = None,
        weights: Optional[PlannerWeights] = None,
        supervisor_params: Optional[SupervisorParams] = None,
    ):
        self.script = script
        self.social_params = social_params or SocialCostParams()
        self.weights = weights or PlannerWeights()
        self.supervisor_params = supervisor_params or SupervisorParams()
        self.reset(script.seed if seed is None else seed)

    def reset(self, seed: Optional[int] = None) -> None:
        if seed is not None:
            self.seed = seed
        self.rng = CountingRng(self.seed)
        self.sensors = VirtualSensors(self.script)
        self.tracker = Tracker()
        self.manager = PersonManager()
        self.sup_state = initial_state()
        self.agents = [RuntimeAgent(id=a.id, script=a) for a in self.script.agents]
        self.robot_pose = self.script.robot.start
        self.goal = self.script.robot.goal
        self.nav_goal = self.goal if self.script.robot.mode == "goal" else None
        self.tick = 0
        self.time = 0.0
        self.robot_speaking = False
        self.last_u = (0.0, 0.0)
        self.stop_events = 0
        self.field = None
        self.field_version = 0
        self.last_snapshot: Optional[SceneSnapshot] = None
        self.last_entry: Optional[dict] = None
        self._prev_seq = None
        self._orient: dict = {}
        self._seated: dict = {}
        self._pending_edits: list[dict] = []

    # -- interactive edits ---------------------------------------------------

    def queue_edit(self, edit: dict) -> None:
        self._pending_edits.append(edit)

    def _agent_named(self, name: str) -> RuntimeAgent:
        for agent in self.agents:
            if agent.id == name:
                return agent
        raise KeyError(f"no agent named {name!r}")

    def _apply_edit(self, edit: dict) -> None:
        op = edit["op"]
        if op == "add":
            if any(a.id == edit["agent"] for a in self.agents):
                raise KeyError(f"agent {edit['agent']!r} already exists")
            agent = RuntimeAgent(
                id=edit["agent"],
                pos=tuple(edit["pos"]),
                orientation=float(edit.get("orientation", 0.0)),
                seated=bool(edit.get("seated", False)),
                speaking=bool(edit.get("speaking", False)),
            )
            self.agents.append(agent)
            self.sensors.add_agent(
                agent.id,
                appearance_seed=int(edit.get("appearance_seed", 1000 + len(self.agents))),
                voice_seed=int(edit.get("voice_seed", 2000 + len(self.agents))),
            )
        elif op == "move":
            self._agent_named(edit["agent"]).pos = tuple(edit["pos"])
        elif op == "remove":
            self.agents.remove(self._agent_named(edit["agent"]))
        elif op == "set_orientation":
            self._agent_named(edit["agent"]).orientation = float(edit["orientation"])
        elif op == "set_seated":
            self._agent_named(edit["agent"]).seated = bool(edit["seated"])
        elif op == "set_speaking":
            self._agent_named(edit["agent"]).speaking = bool(edit["speaking"])
        elif op == "move_goal":
            self.goal = (float(edit["goal"][0]), float(edit["goal"][1]))
            if self.script.robot.mode == "goal":
                self.nav_goal = self.goal
        else:
            raise KeyError(f"unknown edit op {op!r}")

    def apply_pending_edits(self) -> None:
        for edit in self._pending_edits:
            self._apply_edit(edit)
        self._pending_edits = []

    # -- one tick ------------------------------------------------------------

    def tick_once(self) -> dict:
        self.apply_pending_edits()
        now = self.time
        draws_before = self.rng.draws

        truth = [agent.truth_at(now) for agent in self.agents]
        frame = self.sensors.emit(
            self.tick, truth, self.robot_pose, self.robot_speaking, self.rng
        )

        doas = [(v.doa, v.id) for v in frame.voices]
        voice_candidates = self.tracker.step(
            frame.detections, doas, DT, robot_pose=self.robot_pose, now=now
        )

        confirmed = self.tracker.confirmed()
        source_to_track = {t.last_detection: t.id for t in confirmed}
        for track in confirmed:
            source = track.last_detection
            if source in frame.orientation_by_source:
                self._orient[track.id] = frame.orientation_by_source[source]
                self._seated[track.id] = frame.seated_by_source[source]

        for face, source, likelihood in face_body_likelihoods(frame):
            track_id = source_to_track.get(source)
            if track_id is not None:
                self.manager.submit(
                    MatchCandidate(a=face, b=track_id, likelihood=likelihood, time=now)
                )
        for cand in voice_candidates:
            self.manager.submit(cand)
        live = {t.id for t in confirmed}
        self._orient = {k: v for k, v in self._orient.items() if k in live}
        self._seated = {k: v for k, v in self._seated.items() if k in live}

        partition = self.manager.resolve(now, bodies=[t.id for t in confirmed])

        bodies = tuple(
            BodyObservation(
                id=t.id,
                embedding=t.embedding,
                ground_pos=(float(t.position[0]), float(t.position[1])),
                ground_vel=(float(t.velocity[0]), float(t.velocity[1])),
                orientation=self._orient.get(t.id),
                seated=self._seated.get(t.id, False),
            )
            for t in confirmed
        )
        body_pose = {
            b.id: (b.ground_pos[0], b.ground_pos[1], b.orientation)
            for b in bodies
            if b.orientation is not None
        }
        person_poses = {
            p.id: body_pose[p.body]
            for p in partition.persons
            if p.body is not None and p.body in body_pose
        }
        groups = detect_groups(person_poses)

        snapshot = SceneSnapshot(
            time=now,
            robot=RobotState(
                pose=self.robot_pose, velocity=self.last_u, speaking=self.robot_speaking
            ),
            faces=frame.faces,
            bodies=bodies,
            voices=frame.voices,
            persons=partition.persons,
            groups=tuple(groups),
            stale=frozenset(),
        )
        field = build_cost_field(snapshot, self.script.grid, self.social_params)
        if self.field is None or not np.array_equal(field.total, self.field.total):
            self.field_version += 1
        self.field = field
        self.last_snapshot = snapshot

        self.sup_state, actions = supervisor_step(
            self.sup_state, snapshot, now,
            cost_field=field, params=self.supervisor_params,
        )
        if self.script.robot.mode == "attend":
            for action in actions:
                if action.kind == "navigate_to":
                    self.nav_goal = (action.pose[0], action.pose[1])
                elif action.kind == "stop":
                    self.nav_goal = None

        plan_entry = None
        u1 = (0.0, 0.0)
        if self.nav_goal is not None:
            try:
                seq = plan(
                    self.robot_pose, self.nav_goal, field,
                    weights=self.weights, previous=self._prev_seq,
                )
                cost = rollout_cost(self.robot_pose, seq, field, self.nav_goal, self.weights)
                u1 = seq.controls[0]
                pose = self.robot_pose
                trajectory = []
                for control in seq.controls:
                    pose = forward_model(pose, control, seq.dt)
                    trajectory.append(_xy(pose))
                plan_entry = {
                    "goal": _xy(self.nav_goal),
                    "u1": [_f(u1[0]), _f(u1[1])],
                    "cost": _f(cost),
                    "trajectory": trajectory,
                }
                self._prev_seq = seq
            except NoFeasiblePlan:
                self.stop_events += 1
                self._prev_seq = None
                plan_entry = {"goal": _xy(self.nav_goal), "stopped": "no_feasible_plan"}

        entry = {
            "tick": self.tick,
            "time": _f(now),
            "truth": {
                "robot": [_f(v) for v in self.robot_pose],
                "agents": [
                    {
                        "id": t.id,
                        "pos": _xy(t.pos),
                        "orientation": _f(t.orientation),
                        "seated": t.seated,
                        "speaking": t.speaking,
                    }
                    for t in truth
                ],
            },
            "observations": {
                "detections": [
                    {"source": d.source_id, "pos": _xy(d.ground_pos), "confidence": _f(d.confidence)}
                    for d in frame.detections
                ],
                "faces": [
                    {"id": f.id.token, "bbox": [_f(v) for v in f.bbox]} for f in frame.faces
                ],
                "voices": [
                    {"id": v.id.token, "doa": _f(v.doa), "active": v.active}
                    for v in frame.voices
                ],
            },
            "partition": {
                "persons": [
                    {
                        "id": p.id.token,
                        "face": None if p.face is None else p.face.token,
                        "body": None if p.body is None else p.body.token,
                        "voice": None if p.voice is None else p.voice.token,
                    }
                    for p in partition.persons
                ],
                "affinity": _f(partition.affinity),
            },
            "groups": [
                {
                    "id": g.id.token,
                    "members": sorted(m.token for m in g.members),
                    "center": None if g.center is None else _xy(g.center),
                }
                for g in groups
            ],
            "tracks": [
                {
                    "id": t.id.token,
                    "x": _f(t.position[0]),
                    "y": _f(t.position[1]),
                    "vx": _f(t.velocity[0]),
                    "vy": _f(t.velocity[1]),
                    "status": t.status,
                    "orientation": self._orient.get(t.id),
                }
                for t in self.tracker.tracks
            ],
            "supervisor": {
                "phase": self.sup_state.phase,
                "target": None if self.sup_state.target is None else self.sup_state.target.token,
                "actions": [
                    {
                        "kind": a.kind,
                        "target": None if a.target is None else a.target.token,
                        "pose": None if a.pose is None else [_f(v) for v in a.pose],
                        "tag": a.tag,
                    }
                    for a in actions
                ],
            },
            "plan": plan_entry,
            "rng_draws": self.rng.draws - draws_before,
        }

        self.robot_pose = forward_model(self.robot_pose, u1, DT)
        self.last_u = u1
        self.robot_speaking = any(a.kind == "speak" for a in actions)
        self.tick += 1
        self.time = self.tick * DT
        self.last_entry = entry
        return entry

    def run(self) -> list[dict]:
        steps = max(1, int(round(self.script.duration / DT)))
        return [self.tick_once() for _ in range(steps)]

    def header(self) -> dict:
        return {
            "header": {
                "scenario": self.script.raw,
                "seed": self.seed,
                "dt": DT,
                "map_text": self.script.map_text,
                "social_params": asdict(self.social_params),
                "weights": asdict(self.weights),
            }
        }

    def goal_reached(self) -> Optional[bool]:
        if self.script.robot.mode != "goal" or self.goal is None:
            return None
        dx = self.robot_pose[0] - self.goal[0]
        dy = self.robot_pose[1] - self.goal[1]
        return math.hypot(dx, dy) <= GOAL_TOLERANCE


def dumps_canonical(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_jsonl(path: str, header: dict, entries: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(header) + "\n")
        for entry in entries:
            fh.write(dumps_canonical(entry) + "\n")


def read_jsonl(path: str) -> tuple[dict, list[dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [json.loads(line) for line in fh if line.strip()]
    if not lines or "header" not in lines[0]:
        raise ValueError("log file has no header record")
    return lines[0]["header"], lines[1:]


def run(script: ScenarioScript, seed: Optional[int] = None) -> tuple[Engine, list[dict]]:
    engine = Engine(script, seed=seed)
    entries = engine.run()
    return engine, entries
