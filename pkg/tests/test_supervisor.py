"""Tests for the interaction state machine."""

import math

import numpy as np
import pytest

from socialscene.nav import OccupancyGrid, build_cost_field
from socialscene.scene import (
    BodyObservation,
    GroupRecord,
    PersonRecord,
    RobotState,
    SceneSnapshot,
    VoiceObservation,
    body_id,
    group_id,
    person_id,
    voice_id,
)
from socialscene.supervisor import (
    APPROACHING,
    DISENGAGING,
    ENGAGED,
    IDLE,
    InteractionState,
    RobotAction,
    SupervisorParams,
    check_half_duplex,
    initial_state,
    step,
)

EMB = np.concatenate([[1.0], np.zeros(7)])
VOICE_EMB = np.concatenate([[1.0], np.zeros(191)])


def make_person(token, pos, orientation, voice=None):
    body = BodyObservation(
        id=body_id(f"b_{token}"),
        embedding=EMB,
        ground_pos=pos,
        ground_vel=(0.0, 0.0),
        orientation=orientation,
    )
    person = PersonRecord(
        id=person_id(token), body=body.id, voice=voice.id if voice else None
    )
    return body, person


def snapshot_at(time, robot_pose, bodies=(), persons=(), voices=(), groups=()):
    return SceneSnapshot(
        time=time,
        robot=RobotState(pose=robot_pose),
        faces=(),
        bodies=tuple(bodies),
        voices=tuple(voices),
        persons=tuple(persons),
        groups=tuple(groups),
        stale=frozenset(),
    )


def open_field(snapshot):
    grid = OccupancyGrid.empty(10.0, 10.0, 0.05, origin=(-5.0, -5.0))
    return build_cost_field(snapshot, grid)


def kinds(actions):
    return [a.kind for a in actions]


class TestIdle:
    def test_empty_scene_stays_idle(self):
        state = initial_state()
        snap = snapshot_at(0.0, (0.0, 0.0, 0.0))
        state, actions = step(state, snap, 0.0, cost_field=open_field(snap))
        assert state.phase == IDLE
        assert actions == ()

    def test_dwelling_person_triggers_approach(self):
        state = initial_state()
        transition_time = None
        navigate = None
        for tick in range(30):
            now = tick * 0.1
            body, person = make_person("p1", (2.0, 0.0), math.pi)
            snap = snapshot_at(now, (0.0, 0.0, 0.0), [body], [person])
            state, actions = step(state, snap, now, cost_field=open_field(snap))
            if state.phase == APPROACHING:
                transition_time = now
                navigate = actions[0]
                break
        assert transition_time == pytest.approx(2.0)
        assert navigate.kind == "navigate_to"
        assert navigate.pose[0] == pytest.approx(0.8, abs=1e-9)
        assert navigate.pose[1] == pytest.approx(0.0, abs=1e-9)
        assert state.target == person_id("p1")

    def test_glance_away_resets_dwell(self):
        state = initial_state()
        transition_time = None
        for tick in range(35):
            now = tick * 0.1
            # Looks away for a moment at t = 1.0 s.
            orientation = 0.0 if tick == 10 else math.pi
            body, person = make_person("p1", (2.0, 0.0), orientation)
            snap = snapshot_at(now, (0.0, 0.0, 0.0), [body], [person])
            state, _ = step(state, snap, now, cost_field=open_field(snap))
            if state.phase != IDLE:
                transition_time = now
                break
        # Dwell restarted at 1.1 s, so the trigger lands at 1.1 + 2.0.
        assert state.phase == APPROACHING
        assert transition_time == pytest.approx(3.1, abs=0.01)

    def test_out_of_range_person_is_ignored(self):
        state = initial_state()
        for tick in range(40):
            now = tick * 0.1
            body, person = make_person("p1", (5.0, 0.0), math.pi)
            snap = snapshot_at(now, (0.0, 0.0, 0.0), [body], [person])
            state, actions = step(state, snap, now, cost_field=open_field(snap))
            assert state.phase == IDLE
            assert actions == ()

    def test_person_facing_away_never_triggers(self):
        state = initial_state()
        for tick in range(40):
            now = tick * 0.1
            body, person = make_person("p1", (2.0, 0.0), 0.0)
            snap = snapshot_at(now, (0.0, 0.0, 0.0), [body], [person])
            state, _ = step(state, snap, now, cost_field=open_field(snap))
            assert state.phase == IDLE


class TestApproaching:
    @staticmethod
    def approaching_state(anchor="p1", now=0.0):
        return InteractionState(
            phase=APPROACHING, target=person_id(anchor), anchor=person_id(anchor),
            entered_at=now,
        )

    def test_far_robot_keeps_navigating(self):
        body, person = make_person("p1", (3.5, 0.0), math.pi)
        snap = snapshot_at(3.0, (0.0, 0.0, 0.0), [body], [person])
        state, actions = step(
            self.approaching_state(), snap, 3.0, cost_field=open_field(snap)
        )
        assert state.phase == APPROACHING
        assert kinds(actions) == ["navigate_to"]
        assert actions[0].pose[0] == pytest.approx(2.3, abs=1e-9)

    def test_engages_near_approach_pose(self):
        body, person = make_person("p1", (3.5, 0.0), math.pi)
        snap = snapshot_at(5.0, (1.5, 0.0, 0.0), [body], [person])
        state, actions = step(
            self.approaching_state(), snap, 5.0, cost_field=open_field(snap)
        )
        assert state.phase == ENGAGED
        assert kinds(actions) == ["stop", "face", "speak"]
        assert actions[2].tag == "greeting"
        assert check_half_duplex(actions)

    def test_vanished_anchor_forces_disengage(self):
        snap = snapshot_at(4.0, (0.0, 0.0, 0.0))
        state, actions = step(
            self.approaching_state(), snap, 4.0, cost_field=open_field(snap)
        )
        assert state.phase == DISENGAGING
        assert actions == ()

    def test_group_target_follows_anchor(self):
        body_a, person_a = make_person("p1", (2.0, 0.5), -math.pi / 2)
        body_b, person_b = make_person("p2", (2.0, -0.9), math.pi / 2)
        group = GroupRecord(
            id=group_id("g1"),
            members=frozenset({person_a.id, person_b.id}),
            center=(2.0, -0.2),
        )
        snap = snapshot_at(
            2.0, (-1.0, 0.0, 0.0), [body_a, body_b], [person_a, person_b], groups=[group]
        )
        state, actions = step(
            self.approaching_state(), snap, 2.0, cost_field=open_field(snap)
        )
        assert state.phase == APPROACHING
        assert state.target == group.id
        assert actions[0].target == group.id


class TestEngaged:
    @staticmethod
    def engaged_state(members, anchor, target, now):
        return InteractionState(
            phase=ENGAGED,
            target=target,
            anchor=person_id(anchor),
            focus=person_id(anchor),
            entered_at=now,
            last_seen=tuple(sorted(((person_id(m), now) for m in members),
                            key=lambda kv: kv[0].token)),
        )

    @staticmethod
    def pair_snapshot(time, active_speaker=None):
        voice_a = VoiceObservation(
            id=voice_id("v1"), doa=0.1, active=active_speaker == "p1", embedding=VOICE_EMB
        )
        voice_b = VoiceObservation(
            id=voice_id("v2"), doa=-0.1, active=active_speaker == "p2", embedding=VOICE_EMB
        )
        body_a, person_a = make_person("p1", (2.0, 0.7), -math.pi / 2, voice=voice_a)
        body_b, person_b = make_person("p2", (2.0, -0.7), math.pi / 2, voice=voice_b)
        group = GroupRecord(
            id=group_id("g1"),
            members=frozenset({person_a.id, person_b.id}),
            center=(2.0, 0.0),
        )
        return snapshot_at(
            time, (0.8, 0.0, 0.0), [body_a, body_b], [person_a, person_b],
            voices=[voice_a, voice_b], groups=[group],
        )

    def test_faces_active_speaker_and_listens(self):
        state = self.engaged_state(["p1", "p2"], "p1", group_id("g1"), 10.0)
        snap = self.pair_snapshot(10.1, active_speaker="p2")
        state, actions = step(state, snap, 10.1)
        assert kinds(actions) == ["face", "listen"]
        assert actions[0].target == person_id("p2")
        assert check_half_duplex(actions)

    def test_focus_switches_within_one_tick(self):
        state = self.engaged_state(["p1", "p2"], "p1", group_id("g1"), 10.0)
        state, actions = step(state, self.pair_snapshot(10.1, "p1"), 10.1)
        assert actions[0].target == person_id("p1")
        state, actions = step(state, self.pair_snapshot(10.2, "p2"), 10.2)
        assert actions[0].target == person_id("p2")

    def test_focus_stable_while_speaker_continues(self):
        state = self.engaged_state(["p1", "p2"], "p2", group_id("g1"), 10.0)
        state, actions = step(state, self.pair_snapshot(10.1, "p2"), 10.1)
        assert actions[0].target == person_id("p2")
        state, actions = step(state, self.pair_snapshot(10.2, "p2"), 10.2)
        assert actions[0].target == person_id("p2")

    def test_quiet_group_faces_anchor(self):
        state = self.engaged_state(["p1", "p2"], "p1", group_id("g1"), 10.0)
        state, actions = step(state, self.pair_snapshot(10.1), 10.1)
        assert kinds(actions) == ["face"]
        assert actions[0].target == person_id("p1")

    def test_departure_timeout_then_farewell(self):
        state = self.engaged_state(["p1"], "p1", person_id("p1"), 10.0)
        now = 10.0
        while state.phase == ENGAGED and now < 20.0:
            now += 0.1
            empty = snapshot_at(now, (0.8, 0.0, 0.0))
            state, actions = step(state, empty, now)
        assert state.phase == DISENGAGING
        # Three seconds of absence, to within one tick of float accumulation.
        assert 13.0 - 1e-9 <= now <= 13.11
        state, actions = step(state, snapshot_at(now + 0.1, (0.8, 0.0, 0.0)), now + 0.1)
        assert state.phase == IDLE
        assert kinds(actions) == ["speak", "wave"]
        assert actions[0].tag == "farewell"

    def test_brief_dropout_does_not_end_engagement(self):
        state = self.engaged_state(["p1", "p2"], "p1", group_id("g1"), 10.0)
        state, _ = step(state, snapshot_at(10.1, (0.8, 0.0, 0.0)), 10.1)
        assert state.phase == ENGAGED
        state, _ = step(state, self.pair_snapshot(10.2), 10.2)
        assert state.phase == ENGAGED
        # Timers refreshed: two more absent seconds still within the window.
        state, _ = step(state, snapshot_at(12.0, (0.8, 0.0, 0.0)), 12.0)
        assert state.phase == ENGAGED

    def test_anchor_handoff_when_anchor_leaves(self):
        state = self.engaged_state(["p1", "p2"], "p1", group_id("g1"), 10.0)
        voice_b = VoiceObservation(
            id=voice_id("v2"), doa=-0.1, active=False, embedding=VOICE_EMB
        )
        body_b, person_b = make_person("p2", (2.0, -0.7), math.pi / 2, voice=voice_b)
        snap = snapshot_at(10.1, (0.8, 0.0, 0.0), [body_b], [person_b], voices=[voice_b])
        state, actions = step(state, snap, 10.1)
        assert state.phase == ENGAGED
        assert state.anchor == person_id("p2")
        assert state.target == person_id("p2")


class TestInvariants:
    def test_state_validation(self):
        with pytest.raises(ValueError):
            InteractionState(phase="confused", target=person_id("p1"))
        with pytest.raises(ValueError):
            InteractionState(phase=ENGAGED, target=None)
        with pytest.raises(ValueError):
            InteractionState(phase=IDLE, target=person_id("p1"))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SupervisorParams(engage_hold=0.0)
        with pytest.raises(ValueError):
            SupervisorParams(notice_range=-1.0)

    def test_half_duplex_checker(self):
        assert check_half_duplex((RobotAction(kind="speak", tag="x"),))
        assert check_half_duplex((RobotAction(kind="listen"),))
        assert not check_half_duplex(
            (RobotAction(kind="speak", tag="x"), RobotAction(kind="listen"))
        )

    def test_half_duplex_over_full_episode(self):
        state = initial_state()
        body, person = make_person("p1", (2.5, 0.0), math.pi)
        robot = (0.0, 0.0, 0.0)
        for tick in range(80):
            now = tick * 0.1
            if tick < 60:
                snap = snapshot_at(now, robot, [body], [person])
            else:
                snap = snapshot_at(now, robot, [], [])
            field = open_field(snap)
            state, actions = step(state, snap, now, cost_field=field)
            assert check_half_duplex(actions)
            if state.phase == APPROACHING:
                for action in actions:
                    assert action.kind in {"navigate_to"}
                # Teleport toward the dock point like the planner would.
                pose = actions[0].pose
                robot = (
                    robot[0] + 0.5 * (pose[0] - robot[0]),
                    robot[1] + 0.5 * (pose[1] - robot[1]),
                    robot[2],
                )
            if state.phase != IDLE:
                assert state.target is not None
