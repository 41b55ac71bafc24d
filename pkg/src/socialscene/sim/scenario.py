"""Scenario scripts: strict JSON schema, plain-text maps, agent motion.

A scenario bundles a map reference, a robot start (plus optional goal), a
list of scripted agents (piecewise-linear waypoint tracks, an orientation
policy, speech intervals, appearance/voice seeds), sensor noise settings,
and the ground-truth conversational groups used for metrics.

Maps are plain text: a `resolution` header line, an optional `origin` line,
then rows of `#` (occupied) and `.` (free), first row at the top of the map.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Union

import jsonschema

from ..nav import OccupancyGrid


class ParseError(ValueError):
    """File-level failure: missing file, bad JSON, malformed map text."""


class SchemaError(ValueError):
    """Schema or semantic violation; the message names the offending fields."""


_WAYPOINT = {
    "type": "object",
    "properties": {
        "time": {"type": "number", "minimum": 0},
        "pos": {
            "type": "array",
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
    },
    "required": ["time", "pos"],
    "additionalProperties": False,
}

_ORIENTATION = {
    "oneOf": [
        {"const": "path"},
        {
            "type": "object",
            "properties": {"fixed": {"type": "number"}},
            "required": ["fixed"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "face": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                }
            },
            "required": ["face"],
            "additionalProperties": False,
        },
    ]
}

_AGENT = {
    "type": "object",
    "properties": {
        "id": {"type": "string", "pattern": "^[A-Za-z][A-Za-z0-9_]*$"},
        "waypoints": {"type": "array", "items": _WAYPOINT, "minItems": 1},
        "orientation": _ORIENTATION,
        "seated": {"type": "boolean"},
        "speech": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number", "minimum": 0},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "appearance_seed": {"type": "integer", "minimum": 0},
        "voice_seed": {"type": "integer", "minimum": 0},
    },
    "required": ["id", "waypoints"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string", "pattern": "^[a-z][a-z0-9_]*$"},
        "map": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "robot": {
            "type": "object",
            "properties": {
                "start": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "goal": {
                    "type": ["array", "null"],
                    "items": {"type": "number"},
                    "minItems": 2,
                    "maxItems": 2,
                },
                "mode": {"enum": ["goal", "attend"]},
            },
            "required": ["start"],
            "additionalProperties": False,
        },
        "agents": {"type": "array", "items": _AGENT},
        "sensors": {
            "type": "object",
            "properties": {
                "position_sigma": {"type": "number", "minimum": 0},
                "embedding_sigma": {"type": "number", "minimum": 0},
                "doa_sigma": {"type": "number", "minimum": 0},
                "dropout": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "groups": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        },
    },
    "required": ["name", "map", "seed", "duration", "robot"],
    "additionalProperties": False,
}

OrientationPolicy = Union[str, tuple[str, tuple[float, ...]]]


@dataclass(frozen=True)
class AgentScript:
    """One scripted walker/talker. Position is piecewise linear in time."""

    id: str
    waypoints: tuple[tuple[float, tuple[float, float]], ...]
    orientation: OrientationPolicy = "path"
    seated: bool = False
    speech: tuple[tuple[float, float], ...] = ()
    appearance_seed: int = 0
    voice_seed: int = 0

    def position(self, t: float) -> tuple[float, float]:
        points = self.waypoints
        if t <= points[0][0]:
            return points[0][1]
        for (t0, p0), (t1, p1) in zip(points, points[1:]):
            if t <= t1:
                a = (t - t0) / (t1 - t0)
                return (p0[0] + a * (p1[0] - p0[0]), p0[1] + a * (p1[1] - p0[1]))
        return points[-1][1]

    def heading(self, t: float) -> float:
        """Orientation at time t under this agent's policy."""
        if self.orientation == "path":
            return self._path_heading(t)
        kind, value = self.orientation
        if kind == "fixed":
            return value[0]
        px, py = self.position(t)
        return math.atan2(value[1] - py, value[0] - px)

    def _path_heading(self, t: float) -> float:
        segments = [
            (t0, t1, p0, p1)
            for (t0, p0), (t1, p1) in zip(self.waypoints, self.waypoints[1:])
            if p0 != p1
        ]
        chosen = None
        for t0, t1, p0, p1 in segments:
            if t0 <= t:
                chosen = (p0, p1)
            if t < t1:
                break
        if chosen is None:
            chosen = segments[0][2:] if segments else None
        if chosen is None:
            return 0.0
        (x0, y0), (x1, y1) = chosen
        return math.atan2(y1 - y0, x1 - x0)

    def velocity(self, t: float) -> tuple[float, float]:
        for (t0, p0), (t1, p1) in zip(self.waypoints, self.waypoints[1:]):
            if t0 <= t < t1:
                dt = t1 - t0
                return ((p1[0] - p0[0]) / dt, (p1[1] - p0[1]) / dt)
        return (0.0, 0.0)

    def speaking(self, t: float) -> bool:
        return any(t0 <= t < t1 for t0, t1 in self.speech)


@dataclass(frozen=True)
class SensorConfig:
    position_sigma: float = 0.0
    embedding_sigma: float = 0.0
    doa_sigma: float = 0.0
    dropout: float = 0.0


@dataclass(frozen=True)
class RobotScript:
    start: tuple[float, float, float]
    goal: Optional[tuple[float, float]] = None
    mode: str = "goal"


@dataclass(frozen=True)
class ScenarioScript:
    name: str
    grid: OccupancyGrid
    robot: RobotScript
    duration: float
    seed: int
    agents: tuple[AgentScript, ...] = ()
    sensors: SensorConfig = field(default_factory=SensorConfig)
    truth_groups: tuple[frozenset[str], ...] = ()
    raw: Optional[dict] = None
    map_text: str = ""


def parse_map(text: str) -> OccupancyGrid:
    """Parse the plain-text map format into an occupancy grid."""
    resolution = None
    origin = (0.0, 0.0)
    rows: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped and not rows:
            continue
        parts = stripped.split()
        if parts and parts[0] == "resolution" and not rows:
            if len(parts) != 2:
                raise ParseError(f"map line {lineno}: resolution needs one value")
            resolution = float(parts[1])
        elif parts and parts[0] == "origin" and not rows:
            if len(parts) != 3:
                raise ParseError(f"map line {lineno}: origin needs two values")
            origin = (float(parts[1]), float(parts[2]))
        elif stripped:
            rows.append(stripped)
    if resolution is None:
        raise ParseError("map is missing the resolution header")
    if not rows:
        raise ParseError("map has no grid rows")
    try:
        return OccupancyGrid.from_text("\n".join(rows), resolution, origin)
    except ValueError as exc:
        raise ParseError(f"bad map grid: {exc}") from exc


def load_map(path: str) -> OccupancyGrid:
    try:
        with open(path, "r", encoding="ascii") as fh:
            return parse_map(fh.read())
    except OSError as exc:
        raise ParseError(f"cannot read map {path}: {exc}") from exc


def _schema_errors(data: dict) -> list[str]:
    validator = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)
    out = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.path))):
        where = "$" + "".join(
            f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.path
        )
        out.append(f"{where}: {err.message}")
    return out


def _semantic_errors(data: dict) -> list[str]:
    out = []
    seen_ids = set()
    for i, agent in enumerate(data.get("agents", [])):
        aid = agent.get("id")
        if aid in seen_ids:
            out.append(f"$.agents[{i}].id: duplicate agent id {aid!r}")
        seen_ids.add(aid)
        times = [w["time"] for w in agent.get("waypoints", [])]
        if any(b <= a for a, b in zip(times, times[1:])):
            out.append(f"$.agents[{i}].waypoints: times must be strictly increasing")
        for j, (t0, t1) in enumerate(agent.get("speech", [])):
            if t1 <= t0:
                out.append(f"$.agents[{i}].speech[{j}]: interval end must exceed start")
    for i, members in enumerate(data.get("groups", [])):
        unknown = sorted(set(members) - seen_ids)
        if unknown:
            out.append(f"$.groups[{i}]: unknown agent ids {unknown}")
        if len(set(members)) != len(members):
            out.append(f"$.groups[{i}]: duplicate members")
    return out


def _parse_orientation(value) -> OrientationPolicy:
    if value == "path" or value is None:
        return "path"
    if "fixed" in value:
        return ("fixed", (float(value["fixed"]),))
    return ("face", (float(value["face"][0]), float(value["face"][1])))


def parse_scenario(data: dict, base_dir: str = ".") -> ScenarioScript:
    """Validate a scenario dict and resolve its map. Raises SchemaError."""
    errors = _schema_errors(data)
    if not errors:
        errors = _semantic_errors(data)
    if errors:
        raise SchemaError("; ".join(errors))

    map_path = os.path.join(base_dir, data["map"])
    grid = load_map(map_path)
    with open(map_path, "r", encoding="ascii") as fh:
        map_text = fh.read()

    agents = tuple(
        AgentScript(
            id=a["id"],
            waypoints=tuple(
                (float(w["time"]), (float(w["pos"][0]), float(w["pos"][1])))
                for w in a["waypoints"]
            ),
            orientation=_parse_orientation(a.get("orientation")),
            seated=a.get("seated", False),
            speech=tuple((float(t0), float(t1)) for t0, t1 in a.get("speech", [])),
            appearance_seed=a.get("appearance_seed", 0),
            voice_seed=a.get("voice_seed", 0),
        )
        for a in data.get("agents", [])
    )
    robot_cfg = data["robot"]
    goal = robot_cfg.get("goal")
    robot = RobotScript(
        start=tuple(float(v) for v in robot_cfg["start"]),
        goal=None if goal is None else (float(goal[0]), float(goal[1])),
        mode=robot_cfg.get("mode", "goal"),
    )
    sensors_cfg = data.get("sensors", {})
    sensors = SensorConfig(
        position_sigma=sensors_cfg.get("position_sigma", 0.0),
        embedding_sigma=sensors_cfg.get("embedding_sigma", 0.0),
        doa_sigma=sensors_cfg.get("doa_sigma", 0.0),
        dropout=sensors_cfg.get("dropout", 0.0),
    )
    return ScenarioScript(
        name=data["name"],
        grid=grid,
        robot=robot,
        duration=float(data["duration"]),
        seed=int(data["seed"]),
        agents=agents,
        sensors=sensors,
        truth_groups=tuple(frozenset(g) for g in data.get("groups", [])),
        raw=data,
        map_text=map_text,
    )


def load_scenario(path: str) -> ScenarioScript:
    """Load and validate a scenario JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"scenario {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("$: scenario must be a JSON object")
    return parse_scenario(data, base_dir=os.path.dirname(os.path.abspath(path)))
