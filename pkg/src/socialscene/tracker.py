"""Ground-plane multi-object tracker with appearance re-identification.

Detections arrive as map-frame floor positions plus appearance embeddings.
Each track runs a constant-velocity Kalman filter; association mixes the
Mahalanobis position distance with embedding dissimilarity and gates on the
chi-square 99% ellipse. Reliable sound directions fold in as bearing-only
measurements, which also yields body-voice match candidates for the
association graph. Audio alone never spawns a track.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .association import MatchCandidate, hungarian_assign
from .scene import EntityId, body_id, wrap_angle

CHI2_GATE_99 = 9.21034  # chi-square inverse CDF, 2 dof, p = 0.99

TENTATIVE = "tentative"
CONFIRMED = "confirmed"
DEAD = "dead"


class HorizonViolation(ValueError):
    """The back-projected ray does not hit the floor in front of the camera."""


@dataclass(frozen=True)
class CameraModel:
    height: float  # metres above the floor
    pitch: float  # radians, negative = tilted down
    focal: float  # pixels
    cx: float
    cy: float


def project_to_ground(
    feet_pixel: tuple[float, float], camera: CameraModel
) -> tuple[float, float]:
    """Intersect the pixel's back-projected ray with the floor plane.

    Robot frame: x forward, y left, z up, camera at (0, 0, height).
    """
    u, v = feet_pixel
    dx = (u - camera.cx) / camera.focal
    dy = (v - camera.cy) / camera.focal
    sp, cp = math.sin(camera.pitch), math.cos(camera.pitch)
    # camera basis in the robot frame: image right, image down, optical axis
    right = np.array([0.0, -1.0, 0.0])
    down = np.array([sp, 0.0, -cp])
    optical = np.array([cp, 0.0, sp])
    ray = dx * right + dy * down + optical
    if ray[2] >= -1e-12:
        raise HorizonViolation("ray at or above the horizon")
    t = camera.height / -ray[2]
    return (float(t * ray[0]), float(t * ray[1]))


@dataclass
class TrackerParams:
    position_weight: float = 0.3  # lambda: position vs appearance mix
    gate: float = CHI2_GATE_99
    confirm_hits: int = 3
    kill_misses: int = 5
    accel_var: float = 1.0  # white-acceleration spectral density
    meas_var: float = 0.01  # detection position variance (0.1 m std)
    init_pos_var: float = 0.25
    init_vel_var: float = 1.0
    ema_alpha: float = 0.9
    doa_gate: float = math.radians(15.0)
    doa_sigma: float = math.radians(10.0)


def _transition(dt: float) -> np.ndarray:
    f = np.eye(4)
    f[0, 2] = dt
    f[1, 3] = dt
    return f


def _process_noise(dt: float, q: float) -> np.ndarray:
    # continuous white-noise acceleration, exact discretisation (so that two
    # half-steps compose to one full step)
    a = dt**3 / 3.0
    b = dt**2 / 2.0
    qm = np.zeros((4, 4))
    qm[0, 0] = qm[1, 1] = a
    qm[0, 2] = qm[2, 0] = b
    qm[1, 3] = qm[3, 1] = b
    qm[2, 2] = qm[3, 3] = dt
    return q * qm


_H = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]])


@dataclass(eq=False)
class Track:
    id: EntityId
    state: np.ndarray  # (x, y, vx, vy)
    cov: np.ndarray  # 4x4
    embedding: np.ndarray
    hits: int = 1
    misses: int = 0
    status: str = TENTATIVE
    last_detection: Optional[str] = None

    @property
    def position(self) -> np.ndarray:
        return self.state[:2]

    @property
    def velocity(self) -> np.ndarray:
        return self.state[2:]


@dataclass(frozen=True)
class Detection:
    ground_pos: tuple[float, float]  # map frame
    embedding: np.ndarray
    confidence: float
    source_id: str


class Tracker:
    """Owns the track list; one step() per simulator tick."""

    def __init__(self, params: Optional[TrackerParams] = None):
        self.params = params or TrackerParams()
        self.tracks: list[Track] = []
        self._next_id = 1

    # -- Kalman plumbing -------------------------------------------------

    def predict(self, dt: float) -> None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        f = _transition(dt)
        q = _process_noise(dt, self.params.accel_var)
        for t in self.tracks:
            t.state = f @ t.state
            t.cov = f @ t.cov @ f.T + q

    def _update_position(self, track: Track, z: np.ndarray) -> None:
        r = self.params.meas_var * np.eye(2)
        innovation = z - _H @ track.state
        s = _H @ track.cov @ _H.T + r
        k = track.cov @ _H.T @ np.linalg.inv(s)
        track.state = track.state + k @ innovation
        ikh = np.eye(4) - k @ _H
        track.cov = ikh @ track.cov @ ikh.T + k @ r @ k.T  # Joseph form

    # -- association -----------------------------------------------------

    def mahalanobis_sq(self, track: Track, pos: np.ndarray) -> float:
        r = self.params.meas_var * np.eye(2)
        s = _H @ track.cov @ _H.T + r
        d = pos - track.position
        return float(d @ np.linalg.solve(s, d))

    def associate(
        self, detections: Sequence[Detection]
    ) -> tuple[list[tuple[int, int]], list[int], list[int]]:
        """Pairs of (track index, detection index) plus leftovers."""
        n, m = len(self.tracks), len(detections)
        if n == 0 or m == 0:
            return [], list(range(n)), list(range(m))
        lam = self.params.position_weight
        cost = np.full((n, m), np.inf)
        for i, t in enumerate(self.tracks):
            for j, d in enumerate(detections):
                m2 = self.mahalanobis_sq(t, np.asarray(d.ground_pos))
                if m2 > self.params.gate:
                    continue
                sim = float(np.dot(t.embedding, d.embedding))
                cost[i, j] = lam * math.sqrt(m2) + (1.0 - lam) * (1.0 - sim)
        assign, _ = hungarian_assign(cost)
        matches = [(i, j) for i, j in enumerate(assign) if j is not None]
        um_t = [i for i, j in enumerate(assign) if j is None]
        um_d = [j for j in range(m) if j not in {jj for _, jj in matches}]
        return matches, um_t, um_d

    # -- audio fusion ----------------------------------------------------

    def fuse_doa(
        self,
        doa: float,
        robot_pose: tuple[float, float, float],
        voice: Optional[EntityId] = None,
        now: float = 0.0,
    ) -> Optional[MatchCandidate]:
        """Bearing-only update of the angularly nearest track within the gate.

        Returns the body-voice match candidate when a voice id is supplied.
        The updated track's miss counter resets: a voiced person stays alive
        through visual occlusion, though bearing hits never confirm a track.
        """
        rx, ry, rth = robot_pose
        best: Optional[tuple[float, Track]] = None
        for t in self.tracks:
            dx = float(t.state[0]) - rx
            dy = float(t.state[1]) - ry
            if dx * dx + dy * dy < 1e-6:
                continue
            bearing = wrap_angle(math.atan2(dy, dx) - rth)
            res = wrap_angle(doa - bearing)
            if abs(res) > self.params.doa_gate:
                continue
            if best is None or abs(res) < abs(best[0]):
                best = (res, t)
        if best is None:
            return None
        res, track = best

        dx = float(track.state[0]) - rx
        dy = float(track.state[1]) - ry
        r2 = dx * dx + dy * dy
        h = np.array([[-dy / r2, dx / r2, 0.0, 0.0]])
        rv = self.params.doa_sigma**2
        s = float((h @ track.cov @ h.T)[0, 0]) + rv
        k = (track.cov @ h.T) / s
        track.state = track.state + (k * res).ravel()
        ikh = np.eye(4) - k @ h
        track.cov = ikh @ track.cov @ ikh.T + (k * rv) @ k.T
        track.misses = 0

        if voice is None:
            return None
        likelihood = math.exp(-(res**2) / (2.0 * self.params.doa_sigma**2))
        return MatchCandidate(a=track.id, b=voice, likelihood=likelihood, time=now)

    # -- lifecycle -------------------------------------------------------

    def _spawn(self, det: Detection) -> Track:
        state = np.array([det.ground_pos[0], det.ground_pos[1], 0.0, 0.0])
        cov = np.diag(
            [
                self.params.init_pos_var,
                self.params.init_pos_var,
                self.params.init_vel_var,
                self.params.init_vel_var,
            ]
        )
        emb = np.asarray(det.embedding, dtype=np.float64)
        emb = emb / np.linalg.norm(emb)
        track = Track(
            id=body_id(f"body_{self._next_id}"),
            state=state,
            cov=cov,
            embedding=emb,
            last_detection=det.source_id,
        )
        self._next_id += 1
        return track

    def _absorb(self, track: Track, det: Detection) -> None:
        self._update_position(track, np.asarray(det.ground_pos, dtype=np.float64))
        a = self.params.ema_alpha
        mixed = a * track.embedding + (1.0 - a) * np.asarray(det.embedding)
        track.embedding = mixed / np.linalg.norm(mixed)
        track.hits += 1
        track.misses = 0
        track.last_detection = det.source_id
        if track.status == TENTATIVE and track.hits >= self.params.confirm_hits:
            track.status = CONFIRMED

    def step(
        self,
        detections: Sequence[Detection],
        doas: Sequence[tuple[float, Optional[EntityId]]],
        dt: float,
        robot_pose: tuple[float, float, float] = (0.0, 0.0, 0.0),
        now: float = 0.0,
    ) -> list[MatchCandidate]:
        """One tick: predict, associate, update, fuse audio, age out."""
        self.predict(dt)
        matches, um_tracks, um_dets = self.associate(detections)
        for ti, dj in matches:
            self._absorb(self.tracks[ti], detections[dj])
        for ti in um_tracks:
            self.tracks[ti].misses += 1
            self.tracks[ti].hits = 0
        for dj in um_dets:
            self.tracks.append(self._spawn(detections[dj]))

        # audio after the visual pass: a bearing hit clears this tick's miss,
        # so an occluded but voiced person stays alive
        candidates = []
        for doa, voice in doas:
            cand = self.fuse_doa(doa, robot_pose, voice=voice, now=now)
            if cand is not None:
                candidates.append(cand)

        survivors = []
        for t in self.tracks:
            if t.misses >= self.params.kill_misses:
                t.status = DEAD
            else:
                survivors.append(t)
        self.tracks = survivors
        return candidates

    def confirmed(self) -> list[Track]:
        return [t for t in self.tracks if t.status == CONFIRMED]
