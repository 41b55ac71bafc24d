"""Interaction state machine: when to approach, engage, and withdraw.

A single flat machine with four phases (idle, approaching, engaged,
disengaging) stepped once per tick after perception. It watches for a person
who keeps facing the robot, walks up to a socially acceptable approach pose,
holds the engagement while following the active speaker with its gaze, and
backs out with a farewell once everyone has left.

The machine is a pure function of (state, snapshot, now): every timer lives
inside :class:`InteractionState`, so replaying a log reproduces transitions
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

from .nav import approach_pose
from .nav.social_cost import CostField, Unreachable
from .scene import EntityId, GroupRecord, PersonRecord, SceneSnapshot, wrap_angle

IDLE = "idle"
APPROACHING = "approaching"
ENGAGED = "engaged"
DISENGAGING = "disengaging"

PHASES = (IDLE, APPROACHING, ENGAGED, DISENGAGING)


@dataclass(frozen=True)
class SupervisorParams:
    """Thresholds for noticing, approaching, and letting go.

    ``engage_hold``: how long a person must face the robot before it commits
    to an approach. ``leave_timeout``: how long every engaged person must be
    gone before the robot says goodbye. ``facing_tolerance``: half-angle of
    the cone, in the person's frame, inside which the robot counts as "being
    looked at". ``notice_range``: beyond this distance nobody triggers an
    approach. ``interaction_radius``: conversation distance, shared with the
    approach-pose search.
    """

    engage_hold: float = 2.0
    leave_timeout: float = 3.0
    facing_tolerance: float = math.radians(30.0)
    notice_range: float = 4.0
    interaction_radius: float = 1.2

    def __post_init__(self):
        for name in ("engage_hold", "leave_timeout", "facing_tolerance", "notice_range",
                     "interaction_radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class RobotAction:
    """One abstract actuator command.

    kind is one of navigate_to, face, speak, listen, wave, point, stop.
    navigate_to carries ``pose``; face carries ``target``; speak carries an
    opaque ``tag``; point carries ``direction``.
    """

    kind: str
    target: Optional[EntityId] = None
    pose: Optional[tuple[float, float, float]] = None
    tag: Optional[str] = None
    direction: Optional[float] = None


@dataclass(frozen=True)
class InteractionState:
    """Full machine state. ``target`` is set exactly when phase is not idle.

    ``anchor`` is the person whose attention started the episode; the group
    target is re-resolved from the anchor every tick because detected group
    ids are positional and may be renumbered between ticks. ``facing_since``
    and ``last_seen`` are (person id, seconds) pairs kept sorted by id.
    """

    phase: str = IDLE
    target: Optional[EntityId] = None
    entered_at: float = 0.0
    anchor: Optional[EntityId] = None
    focus: Optional[EntityId] = None
    facing_since: tuple[tuple[EntityId, float], ...] = ()
    last_seen: tuple[tuple[EntityId, float], ...] = ()

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValueError(f"unknown phase {self.phase!r}")
        if (self.target is None) != (self.phase == IDLE):
            raise ValueError("target must be set exactly when phase is not idle")


def initial_state() -> InteractionState:
    return InteractionState()


def _pairs(mapping: Mapping[EntityId, float]) -> tuple[tuple[EntityId, float], ...]:
    return tuple(sorted(mapping.items(), key=lambda kv: kv[0].token))


def _person_positions(snapshot: SceneSnapshot) -> dict[EntityId, tuple[float, float, float]]:
    """Person id -> (x, y, orientation) for persons with a localised body."""
    bodies = {b.id: b for b in snapshot.bodies}
    out: dict[EntityId, tuple[float, float, float]] = {}
    for person in snapshot.persons:
        body = bodies.get(person.body) if person.body is not None else None
        if body is None or body.ground_pos is None or body.orientation is None:
            continue
        out[person.id] = (body.ground_pos[0], body.ground_pos[1], body.orientation)
    return out


def _group_of(person: EntityId, snapshot: SceneSnapshot) -> Optional[GroupRecord]:
    for record in snapshot.groups:
        if person in record.members and len(record.members) >= 2:
            return record
    return None


def _resolve_target(anchor: EntityId, snapshot: SceneSnapshot) -> tuple[EntityId, frozenset[EntityId]]:
    """Current target id and engaged-member set for a live anchor."""
    record = _group_of(anchor, snapshot)
    if record is not None:
        return record.id, record.members
    return anchor, frozenset({anchor})


def _active_speakers(members: frozenset[EntityId], snapshot: SceneSnapshot) -> list[EntityId]:
    voices = {v.id: v for v in snapshot.voices}
    speaking = []
    for person in snapshot.persons:
        if person.id not in members or person.voice is None:
            continue
        voice = voices.get(person.voice)
        if voice is not None and voice.active:
            speaking.append(person.id)
    return sorted(speaking, key=lambda e: e.token)


def _try_approach(anchor: EntityId, target: EntityId, snapshot: SceneSnapshot,
                  cost_field: Optional[CostField],
                  params: SupervisorParams) -> Optional[tuple[float, float, float]]:
    if cost_field is None:
        return None
    try:
        return approach_pose(target, snapshot, cost_field, r_int=params.interaction_radius)
    except (Unreachable, KeyError, ValueError):
        return None


def step(
    state: InteractionState,
    snapshot: SceneSnapshot,
    now: float,
    *,
    cost_field: Optional[CostField] = None,
    params: Optional[SupervisorParams] = None,
) -> tuple[InteractionState, tuple[RobotAction, ...]]:
    """Advance the machine one tick and return the actions for this tick.

    ``cost_field`` is needed to compute approach poses; without one the
    machine still transitions but cannot emit navigate_to.
    """
    params = params or SupervisorParams()
    positions = _person_positions(snapshot)
    present = {p.id for p in snapshot.persons}

    if state.phase == IDLE:
        return _step_idle(state, snapshot, now, positions, cost_field, params)
    if state.phase == APPROACHING:
        return _step_approaching(state, snapshot, now, present, cost_field, params)
    if state.phase == ENGAGED:
        return _step_engaged(state, snapshot, now, present, params)
    return _step_disengaging(state, now)


def _step_idle(state, snapshot, now, positions, cost_field, params):
    rx, ry, _ = snapshot.robot.pose
    facing_prev = dict(state.facing_since)
    facing_now: dict[EntityId, float] = {}
    for pid, (px, py, theta) in positions.items():
        dist = math.hypot(rx - px, ry - py)
        if dist > params.notice_range:
            continue
        bearing = wrap_angle(math.atan2(ry - py, rx - px) - theta)
        if abs(bearing) < params.facing_tolerance:
            facing_now[pid] = facing_prev.get(pid, now)

    dwellers = [
        (since, pid.token, pid)
        for pid, since in facing_now.items()
        if now - since >= params.engage_hold
    ]
    for _, _, anchor in sorted(dwellers):
        target, _members = _resolve_target(anchor, snapshot)
        pose = _try_approach(anchor, target, snapshot, cost_field, params)
        if pose is None:
            continue
        next_state = InteractionState(
            phase=APPROACHING,
            target=target,
            entered_at=now,
            anchor=anchor,
            facing_since=(),
            last_seen=(),
        )
        return next_state, (RobotAction(kind="navigate_to", target=target, pose=pose),)

    return replace(state, facing_since=_pairs(facing_now)), ()


def _step_approaching(state, snapshot, now, present, cost_field, params):
    if state.anchor not in present:
        return replace(state, phase=DISENGAGING, entered_at=now), ()

    target, members = _resolve_target(state.anchor, snapshot)
    pose = _try_approach(state.anchor, target, snapshot, cost_field, params)
    if pose is None:
        # Target became unreachable (boxed in by obstacles); give up politely.
        return replace(state, phase=DISENGAGING, entered_at=now), ()

    rx, ry, _ = snapshot.robot.pose
    if math.hypot(rx - pose[0], ry - pose[1]) <= params.interaction_radius:
        seen = {pid: now for pid in members}
        next_state = replace(
            state,
            phase=ENGAGED,
            target=target,
            entered_at=now,
            focus=state.anchor,
            last_seen=_pairs(seen),
        )
        actions = (
            RobotAction(kind="stop"),
            RobotAction(kind="face", target=state.anchor),
            RobotAction(kind="speak", tag="greeting"),
        )
        return next_state, actions

    return replace(state, target=target), (
        RobotAction(kind="navigate_to", target=target, pose=pose),
    )


def _step_engaged(state, snapshot, now, present, params):
    anchor = state.anchor
    if anchor not in present:
        # Hand the anchor role to whoever of the engaged set is still here.
        remaining = sorted(
            (pid for pid, _ in state.last_seen if pid in present), key=lambda e: e.token
        )
        if remaining:
            anchor = remaining[0]

    if anchor in present:
        target, members = _resolve_target(anchor, snapshot)
    else:
        target, members = state.target, frozenset(pid for pid, _ in state.last_seen)

    seen = dict(state.last_seen)
    for pid in members:
        if pid in present:
            seen[pid] = now
        else:
            seen.setdefault(pid, state.entered_at)

    if all(now - t >= params.leave_timeout for t in seen.values()):
        return replace(state, phase=DISENGAGING, target=target, anchor=anchor,
                       entered_at=now, last_seen=_pairs(seen)), ()

    speakers = _active_speakers(frozenset(seen), snapshot)
    if speakers:
        focus = state.focus if state.focus in speakers else speakers[0]
        actions = (
            RobotAction(kind="face", target=focus),
            RobotAction(kind="listen"),
        )
    else:
        focus = anchor if anchor in present else state.focus
        actions = (RobotAction(kind="face", target=focus),) if focus is not None else ()

    next_state = replace(
        state, target=target, anchor=anchor, focus=focus, last_seen=_pairs(seen)
    )
    return next_state, actions


def _step_disengaging(state, now):
    actions = (
        RobotAction(kind="speak", tag="farewell"),
        RobotAction(kind="wave"),
    )
    return InteractionState(phase=IDLE, entered_at=now), actions


def check_half_duplex(actions: tuple[RobotAction, ...]) -> bool:
    """True when the action set never talks and listens at the same time."""
    kinds = {a.kind for a in actions}
    return not ({"speak", "listen"} <= kinds)
