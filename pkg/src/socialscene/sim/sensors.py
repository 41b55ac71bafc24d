"""Virtual sensors: project scripted agents into detections, faces, voices.

A pinhole camera on the robot yields body detections (ground position plus
appearance embedding) and face boxes for agents inside the frustum that face
the lens. A forward-facing microphone pair yields one noisy bearing per
speaking agent in the frontal half-plane, suppressed while the robot itself
is talking. Every random draw goes through a counting wrapper so tick logs
can record exactly how much entropy was consumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..scene import EntityId, FaceObservation, VoiceObservation, face_id, voice_id, wrap_angle
from ..tracker import Detection
from .scenario import ScenarioScript, SensorConfig

VISUAL_DIM = 16
VOICE_DIM = 192

CAMERA_HALF_FOV = math.radians(60.0)
CAMERA_RANGE = 8.0
CAMERA_MIN_RANGE = 0.3
FOCAL_PX = 500.0
IMAGE_W = 640.0
IMAGE_H = 480.0
PERSON_HEIGHT = 1.7
BODY_WIDTH = 0.5
FACE_SIZE = 0.25
FACE_VISIBLE_HALF_ANGLE = math.radians(75.0)
MIC_HALF_PLANE = math.radians(90.0)
MIN_FACE_OVERLAP = 0.1
MAX_FACE_LIKELIHOOD = 0.95


class CountingRng:
    """numpy Generator facade that counts scalar draws for the tick log."""

    def __init__(self, seed: int):
        self._gen = np.random.Generator(np.random.PCG64(seed))
        self.draws = 0

    def normal(self, loc=0.0, scale=1.0, size=None):
        self.draws += 1 if size is None else int(np.prod(size))
        return self._gen.normal(loc, scale, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        self.draws += 1 if size is None else int(np.prod(size))
        return self._gen.uniform(low, high, size)


@dataclass(frozen=True)
class AgentTruth:
    """Ground-truth state of one agent at the current tick."""

    id: str
    pos: tuple[float, float]
    velocity: tuple[float, float]
    orientation: float
    seated: bool
    speaking: bool


@dataclass(frozen=True)
class SensorFrame:
    """Everything the virtual sensors produced for one tick."""

    detections: tuple[Detection, ...] = ()
    faces: tuple[FaceObservation, ...] = ()
    voices: tuple[VoiceObservation, ...] = ()
    body_boxes: dict = field(default_factory=dict)  # source_id -> bbox
    orientation_by_source: dict = field(default_factory=dict)
    seated_by_source: dict = field(default_factory=dict)
    agent_by_source: dict = field(default_factory=dict)


def _unit_from_seed(stream: int, seed: int, dim: int) -> np.ndarray:
    gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence([stream, seed])))
    v = gen.standard_normal(dim)
    return v / np.linalg.norm(v)


def bbox_overlap(face_box, body_box) -> float:
    """Intersection area over face area; the face box sits inside its body."""
    fx, fy, fw, fh = face_box
    bx, by, bw, bh = body_box
    ix = max(0.0, min(fx + fw, bx + bw) - max(fx, bx))
    iy = max(0.0, min(fy + fh, by + bh) - max(fy, by))
    if fw <= 0 or fh <= 0:
        return 0.0
    return (ix * iy) / (fw * fh)


class VirtualSensors:
    """Owns per-agent persistent embeddings; emits one SensorFrame per tick."""

    def __init__(self, script: ScenarioScript):
        self.config: SensorConfig = script.sensors
        self._face_emb = {
            a.id: _unit_from_seed(1, a.appearance_seed, VISUAL_DIM) for a in script.agents
        }
        self._body_emb = {
            a.id: _unit_from_seed(2, a.appearance_seed, VISUAL_DIM) for a in script.agents
        }
        self._voice_emb = {
            a.id: _unit_from_seed(3, a.voice_seed, VOICE_DIM) for a in script.agents
        }

    def add_agent(self, agent_id: str, appearance_seed: int, voice_seed: int) -> None:
        self._face_emb[agent_id] = _unit_from_seed(1, appearance_seed, VISUAL_DIM)
        self._body_emb[agent_id] = _unit_from_seed(2, appearance_seed, VISUAL_DIM)
        self._voice_emb[agent_id] = _unit_from_seed(3, voice_seed, VOICE_DIM)

    def _perturb(self, emb: np.ndarray, rng: CountingRng) -> np.ndarray:
        sigma = self.config.embedding_sigma
        if sigma <= 0:
            return emb
        noisy = emb + rng.normal(0.0, sigma, emb.shape)
        return noisy / np.linalg.norm(noisy)

    def emit(
        self,
        tick: int,
        truth: list[AgentTruth],
        robot_pose: tuple[float, float, float],
        robot_speaking: bool,
        rng: CountingRng,
    ) -> SensorFrame:
        rx, ry, rtheta = robot_pose
        cfg = self.config
        detections: list[Detection] = []
        faces: list[FaceObservation] = []
        voices: list[VoiceObservation] = []
        body_boxes: dict[str, tuple] = {}
        orientation_by_source: dict[str, float] = {}
        seated_by_source: dict[str, bool] = {}
        agent_by_source: dict[str, str] = {}

        for agent in truth:
            dx = agent.pos[0] - rx
            dy = agent.pos[1] - ry
            dist = math.hypot(dx, dy)
            bearing = wrap_angle(math.atan2(dy, dx) - rtheta)
            in_frustum = (
                CAMERA_MIN_RANGE <= dist <= CAMERA_RANGE
                and abs(bearing) <= CAMERA_HALF_FOV
            )
            if in_frustum:
                if cfg.dropout > 0 and rng.uniform() < cfg.dropout:
                    in_frustum = False
            if in_frustum:
                if cfg.position_sigma > 0:
                    noise = rng.normal(0.0, cfg.position_sigma, 2)
                    observed = (agent.pos[0] + noise[0], agent.pos[1] + noise[1])
                else:
                    observed = agent.pos
                source = f"det_{agent.id}_{tick}"
                emb = self._perturb(self._body_emb[agent.id], rng)
                detections.append(
                    Detection(
                        ground_pos=observed, embedding=emb, confidence=0.9,
                        source_id=source,
                    )
                )
                u = IMAGE_W / 2 - FOCAL_PX * math.tan(bearing)
                h = FOCAL_PX * PERSON_HEIGHT / dist
                w = FOCAL_PX * BODY_WIDTH / dist
                body_box = (u - w / 2, IMAGE_H / 2 - h / 2, w, h)
                body_boxes[source] = body_box
                orientation_by_source[source] = agent.orientation
                seated_by_source[source] = agent.seated
                agent_by_source[source] = agent.id

                robot_bearing = wrap_angle(
                    math.atan2(ry - agent.pos[1], rx - agent.pos[0]) - agent.orientation
                )
                if abs(robot_bearing) <= FACE_VISIBLE_HALF_ANGLE:
                    s = FOCAL_PX * FACE_SIZE / dist
                    face_box = (u - s / 2, body_box[1], s, s)
                    face_emb = self._perturb(self._face_emb[agent.id], rng)
                    faces.append(
                        FaceObservation(
                            id=face_id(f"face_{agent.id}_{tick}"),
                            bbox=face_box,
                            embedding=face_emb,
                            confidence=0.9,
                        )
                    )

            if agent.speaking and not robot_speaking and abs(bearing) <= MIC_HALF_PLANE:
                doa = bearing
                if cfg.doa_sigma > 0:
                    doa = wrap_angle(bearing + rng.normal(0.0, cfg.doa_sigma))
                voices.append(
                    VoiceObservation(
                        id=voice_id(f"voice_{agent.id}"),
                        doa=doa,
                        active=True,
                        embedding=self._voice_emb[agent.id],
                    )
                )

        return SensorFrame(
            detections=tuple(detections),
            faces=tuple(faces),
            voices=tuple(voices),
            body_boxes=body_boxes,
            orientation_by_source=orientation_by_source,
            seated_by_source=seated_by_source,
            agent_by_source=agent_by_source,
        )


def face_body_likelihoods(frame: SensorFrame) -> list[tuple[EntityId, str, float]]:
    """(face id, detection source id, likelihood) from box overlap."""
    out = []
    for face in frame.faces:
        for source, body_box in frame.body_boxes.items():
            overlap = bbox_overlap(face.bbox, body_box)
            if overlap > MIN_FACE_OVERLAP:
                out.append((face.id, source, MAX_FACE_LIKELIHOOD * overlap))
    return out
