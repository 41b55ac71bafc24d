"""Shared entity model: features, persons, groups, robot state and snapshots.

All types are immutable value objects (frozen dataclasses; numpy payloads are
marked read-only on construction). A :class:`SceneSnapshot` is the unit of
exchange between the perception, association and action stages, and
:func:`validate_snapshot` is the single place where cross-entity invariants
are checked.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

TAU = 2.0 * math.pi

FACE = "face"
BODY = "body"
VOICE = "voice"
PERSON = "person"
GROUP = "group"

FEATURE_KINDS = (FACE, BODY, VOICE)
ALL_KINDS = (FACE, BODY, VOICE, PERSON, GROUP)

VOICE_EMBEDDING_DIM = 192
UNIT_NORM_TOL = 1e-6


def wrap_angle(a: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    r = math.fmod(a + math.pi, TAU)
    if r <= 0.0:
        r += TAU
    return r - math.pi


def unit(v: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return v normalised to unit length as a read-only float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    n = float(np.linalg.norm(arr))
    if n == 0.0:
        raise ValueError("cannot normalise a zero vector")
    out = arr / n
    out.flags.writeable = False
    return out


def _freeze(v) -> Optional[np.ndarray]:
    if v is None:
        return None
    arr = np.asarray(v, dtype=np.float64)
    arr = arr.copy() if arr.flags.writeable else arr
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, order=True)
class EntityId:
    """Typed identifier. Feature ids (face/body/voice) are transient; person
    ids are persistent within a run; group ids are transient per detection."""

    kind: str
    token: str

    def __str__(self) -> str:
        return f"{self.kind}:{self.token}"


def face_id(token: str) -> EntityId:
    return EntityId(FACE, token)


def body_id(token: str) -> EntityId:
    return EntityId(BODY, token)


def voice_id(token: str) -> EntityId:
    return EntityId(VOICE, token)


def person_id(token: str) -> EntityId:
    return EntityId(PERSON, token)


def group_id(token: str) -> EntityId:
    return EntityId(GROUP, token)


@dataclass(frozen=True, eq=False)
class FaceObservation:
    id: EntityId
    bbox: tuple[float, float, float, float]  # (x, y, w, h) pixels
    embedding: np.ndarray
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "embedding", _freeze(self.embedding))


@dataclass(frozen=True, eq=False)
class BodyObservation:
    """Body detection. ``ground_pos``, ``ground_vel`` and ``orientation`` are
    filled in by the visual tracker; ``bbox``/``feet_pixel`` may be absent when
    the body was maintained by non-visual evidence (outside the camera
    frustum)."""

    id: EntityId
    embedding: np.ndarray
    bbox: Optional[tuple[float, float, float, float]] = None
    feet_pixel: Optional[tuple[float, float]] = None
    ground_pos: Optional[tuple[float, float]] = None
    ground_vel: Optional[tuple[float, float]] = None
    orientation: Optional[float] = None
    seated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "embedding", _freeze(self.embedding))


@dataclass(frozen=True, eq=False)
class VoiceObservation:
    id: EntityId
    doa: float  # radians relative to robot heading, frontal half-plane
    active: bool
    embedding: np.ndarray  # 192-dim voice signature

    def __post_init__(self):
        object.__setattr__(self, "embedding", _freeze(self.embedding))


@dataclass(frozen=True)
class PersonRecord:
    id: EntityId
    face: Optional[EntityId] = None
    body: Optional[EntityId] = None
    voice: Optional[EntityId] = None
    anonymous: bool = True

    def features(self) -> list[EntityId]:
        return [f for f in (self.face, self.body, self.voice) if f is not None]


@dataclass(frozen=True)
class GroupRecord:
    id: EntityId
    members: frozenset[EntityId]
    center: Optional[tuple[float, float]] = None


@dataclass(frozen=True)
class RobotState:
    pose: tuple[float, float, float]  # (x, y, theta) map frame
    velocity: tuple[float, float] = (0.0, 0.0)  # (v m/s, omega rad/s)
    speaking: bool = False


@dataclass(frozen=True)
class SceneSnapshot:
    time: float
    robot: RobotState
    faces: tuple[FaceObservation, ...] = ()
    bodies: tuple[BodyObservation, ...] = ()
    voices: tuple[VoiceObservation, ...] = ()
    persons: tuple[PersonRecord, ...] = ()
    groups: tuple[GroupRecord, ...] = ()
    # Feature ids referenced by person records that are not observed this
    # tick but still within the association TTL.
    stale: frozenset[EntityId] = field(default_factory=frozenset)


def validate_snapshot(s: SceneSnapshot) -> list[str]:
    """Check every type invariant; return one description per violation.

    Total function: never raises on malformed content, only reports. An empty
    list means the snapshot is valid.
    """
    out: list[str] = []

    for name, obs_list, kind in (
        ("face", s.faces, FACE),
        ("body", s.bodies, BODY),
        ("voice", s.voices, VOICE),
    ):
        seen: set[EntityId] = set()
        for ob in obs_list:
            if ob.id.kind != kind:
                out.append(f"{name} {ob.id}: wrong id kind {ob.id.kind!r}")
            if ob.id in seen:
                out.append(f"{name} {ob.id}: duplicate id")
            seen.add(ob.id)

    for ob in s.faces:
        x, y, w, h = ob.bbox
        if w <= 0 or h <= 0 or x < 0 or y < 0:
            out.append(f"face {ob.id}: degenerate bbox {ob.bbox}")
        if not (0.0 <= ob.confidence <= 1.0):
            out.append(f"face {ob.id}: confidence {ob.confidence} outside [0,1]")
        out.extend(_check_unit(ob.embedding, f"face {ob.id}"))

    for ob in s.bodies:
        if ob.bbox is not None:
            x, y, w, h = ob.bbox
            if w <= 0 or h <= 0:
                out.append(f"body {ob.id}: degenerate bbox {ob.bbox}")
            if ob.feet_pixel is not None:
                u, v = ob.feet_pixel
                if not (x <= u <= x + w) or not (y + 0.75 * h <= v <= y + h):
                    out.append(
                        f"body {ob.id}: feet pixel {ob.feet_pixel} outside "
                        "bbox bottom quarter"
                    )
        if ob.orientation is not None and not (-math.pi < ob.orientation <= math.pi):
            out.append(f"body {ob.id}: orientation {ob.orientation} outside (-pi, pi]")
        out.extend(_check_unit(ob.embedding, f"body {ob.id}"))

    for ob in s.voices:
        if not (-math.pi / 2.0 <= ob.doa <= math.pi / 2.0):
            out.append(f"voice {ob.id}: doa {ob.doa} outside frontal half-plane")
        if ob.embedding is None or ob.embedding.shape != (VOICE_EMBEDDING_DIM,):
            out.append(f"voice {ob.id}: embedding is not {VOICE_EMBEDDING_DIM}-dim")
        else:
            out.extend(_check_unit(ob.embedding, f"voice {ob.id}"))

    observed = {ob.id for ob in s.faces} | {ob.id for ob in s.bodies} | {
        ob.id for ob in s.voices
    }
    seen_p: set[EntityId] = set()
    for rec in s.persons:
        if rec.id.kind != PERSON:
            out.append(f"person {rec.id}: wrong id kind")
        if rec.id in seen_p:
            out.append(f"person {rec.id}: duplicate id")
        seen_p.add(rec.id)
        if not rec.features():
            out.append(f"person {rec.id}: no feature bound")
        for feat, kind in ((rec.face, FACE), (rec.body, BODY), (rec.voice, VOICE)):
            if feat is None:
                continue
            if feat.kind != kind:
                out.append(f"person {rec.id}: {kind} slot holds {feat}")
            elif feat not in observed and feat not in s.stale:
                out.append(f"person {rec.id}: dangling {kind} {feat.token}")

    seen_g: set[EntityId] = set()
    for grp in s.groups:
        if grp.id.kind != GROUP:
            out.append(f"group {grp.id}: wrong id kind")
        if grp.id in seen_g:
            out.append(f"group {grp.id}: duplicate id")
        seen_g.add(grp.id)
        if len(grp.members) < 1:
            out.append(f"group {grp.id}: empty member set")
        for m in grp.members:
            if m not in seen_p:
                out.append(f"group {grp.id}: member {m} is not a person in snapshot")

    theta = s.robot.pose[2]
    if not (-math.pi < theta <= math.pi):
        out.append(f"robot: heading {theta} outside (-pi, pi]")

    return out


def _check_unit(emb: Optional[np.ndarray], who: str) -> list[str]:
    if emb is None:
        return [f"{who}: missing embedding"]
    n = float(np.linalg.norm(emb))
    if abs(n - 1.0) > UNIT_NORM_TOL:
        return [f"{who}: embedding norm {n:.6f} is not 1"]
    return []


# --- JSON serialisation (stable field order) ---------------------------------

def _eid(e: Optional[EntityId]):
    return None if e is None else [e.kind, e.token]


def _eid_from(v) -> Optional[EntityId]:
    return None if v is None else EntityId(v[0], v[1])


def snapshot_to_dict(s: SceneSnapshot) -> dict:
    return {
        "time": s.time,
        "robot": {
            "pose": list(s.robot.pose),
            "velocity": list(s.robot.velocity),
            "speaking": s.robot.speaking,
        },
        "faces": [
            {
                "id": _eid(f.id),
                "bbox": list(f.bbox),
                "embedding": [float(x) for x in f.embedding],
                "confidence": f.confidence,
            }
            for f in s.faces
        ],
        "bodies": [
            {
                "id": _eid(b.id),
                "embedding": [float(x) for x in b.embedding],
                "bbox": None if b.bbox is None else list(b.bbox),
                "feet_pixel": None if b.feet_pixel is None else list(b.feet_pixel),
                "ground_pos": None if b.ground_pos is None else list(b.ground_pos),
                "ground_vel": None if b.ground_vel is None else list(b.ground_vel),
                "orientation": b.orientation,
                "seated": b.seated,
            }
            for b in s.bodies
        ],
        "voices": [
            {
                "id": _eid(v.id),
                "doa": v.doa,
                "active": v.active,
                "embedding": [float(x) for x in v.embedding],
            }
            for v in s.voices
        ],
        "persons": [
            {
                "id": _eid(p.id),
                "face": _eid(p.face),
                "body": _eid(p.body),
                "voice": _eid(p.voice),
                "anonymous": p.anonymous,
            }
            for p in s.persons
        ],
        "groups": [
            {
                "id": _eid(g.id),
                "members": sorted([_eid(m) for m in g.members]),
                "center": None if g.center is None else list(g.center),
            }
            for g in s.groups
        ],
        "stale": sorted([_eid(e) for e in s.stale]),
    }


def snapshot_to_json(s: SceneSnapshot) -> str:
    return json.dumps(snapshot_to_dict(s), separators=(",", ":"))


def snapshot_from_dict(d: dict) -> SceneSnapshot:
    return SceneSnapshot(
        time=d["time"],
        robot=RobotState(
            pose=tuple(d["robot"]["pose"]),
            velocity=tuple(d["robot"]["velocity"]),
            speaking=d["robot"]["speaking"],
        ),
        faces=tuple(
            FaceObservation(
                id=_eid_from(f["id"]),
                bbox=tuple(f["bbox"]),
                embedding=np.array(f["embedding"]),
                confidence=f["confidence"],
            )
            for f in d["faces"]
        ),
        bodies=tuple(
            BodyObservation(
                id=_eid_from(b["id"]),
                embedding=np.array(b["embedding"]),
                bbox=None if b["bbox"] is None else tuple(b["bbox"]),
                feet_pixel=None if b["feet_pixel"] is None else tuple(b["feet_pixel"]),
                ground_pos=None if b["ground_pos"] is None else tuple(b["ground_pos"]),
                ground_vel=None if b["ground_vel"] is None else tuple(b["ground_vel"]),
                orientation=b["orientation"],
                seated=b["seated"],
            )
            for b in d["bodies"]
        ),
        voices=tuple(
            VoiceObservation(
                id=_eid_from(v["id"]),
                doa=v["doa"],
                active=v["active"],
                embedding=np.array(v["embedding"]),
            )
            for v in d["voices"]
        ),
        persons=tuple(
            PersonRecord(
                id=_eid_from(p["id"]),
                face=_eid_from(p["face"]),
                body=_eid_from(p["body"]),
                voice=_eid_from(p["voice"]),
                anonymous=p["anonymous"],
            )
            for p in d["persons"]
        ),
        groups=tuple(
            GroupRecord(
                id=_eid_from(g["id"]),
                members=frozenset(_eid_from(m) for m in g["members"]),
                center=None if g["center"] is None else tuple(g["center"]),
            )
            for g in d["groups"]
        ),
        stale=frozenset(_eid_from(e) for e in d["stale"]),
    )


def snapshot_from_json(text: str) -> SceneSnapshot:
    return snapshot_from_dict(json.loads(text))
