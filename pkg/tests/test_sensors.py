"""Virtual sensors: frustum geometry, noise, gating, determinism."""

import math

import numpy as np
import pytest

from socialscene.sim.scenario import (
    AgentScript,
    RobotScript,
    ScenarioScript,
    SensorConfig,
)
from socialscene.nav import OccupancyGrid
from socialscene.scene import voice_id
from socialscene.sim.sensors import (
    CAMERA_HALF_FOV,
    CAMERA_RANGE,
    CAMERA_MIN_RANGE,
    FOCAL_PX,
    IMAGE_W,
    VISUAL_DIM,
    VOICE_DIM,
    AgentTruth,
    CountingRng,
    VirtualSensors,
    bbox_overlap,
    face_body_likelihoods,
)


def make_script(agent_ids=("a",), sensors=None):
    agents = tuple(
        AgentScript(id=aid, waypoints=((0.0, (1.0, 0.0)),), appearance_seed=i + 1, voice_seed=i + 1)
        for i, aid in enumerate(agent_ids)
    )
    return ScenarioScript(
        name="sensor_bench",
        grid=OccupancyGrid.empty(4.0, 4.0, 0.5, origin=(-2.0, -2.0)),
        robot=RobotScript(start=(0.0, 0.0, 0.0)),
        duration=1.0,
        seed=0,
        agents=agents,
        sensors=sensors or SensorConfig(),
    )


def truth(agent_id="a", pos=(2.0, 0.0), orientation=math.pi, speaking=False,
          velocity=(0.0, 0.0), seated=False):
    return AgentTruth(
        id=agent_id, pos=pos, velocity=velocity, orientation=orientation,
        seated=seated, speaking=speaking,
    )


ROBOT = (0.0, 0.0, 0.0)


class TestCamera:
    def test_noiseless_detection_reports_exact_position(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(pos=(2.0, 0.5))], ROBOT, False, CountingRng(0))
        assert len(frame.detections) == 1
        assert frame.detections[0].ground_pos == (2.0, 0.5)
        assert frame.detections[0].source_id == "det_a_0"
        assert frame.agent_by_source["det_a_0"] == "a"

    def test_agents_outside_fov_or_range_are_dropped(self):
        sensors = VirtualSensors(make_script())
        rng = CountingRng(0)
        behind = truth(pos=(-2.0, 0.0))
        too_far = truth(pos=(CAMERA_RANGE + 0.5, 0.0))
        too_close = truth(pos=(CAMERA_MIN_RANGE / 2, 0.0))
        off_axis_angle = CAMERA_HALF_FOV + 0.1
        off_axis = truth(pos=(2 * math.cos(off_axis_angle), 2 * math.sin(off_axis_angle)))
        for agent in (behind, too_far, too_close, off_axis):
            frame = sensors.emit(0, [agent], ROBOT, False, rng)
            assert frame.detections == ()

    def test_body_box_center_matches_pinhole_projection(self):
        sensors = VirtualSensors(make_script())
        pos = (2.0, 1.0)
        frame = sensors.emit(0, [truth(pos=pos)], ROBOT, False, CountingRng(0))
        x, y, w, h = frame.body_boxes["det_a_0"]
        bearing = math.atan2(pos[1], pos[0])
        assert x + w / 2 == pytest.approx(IMAGE_W / 2 - FOCAL_PX * math.tan(bearing))

    def test_box_size_scales_inversely_with_distance(self):
        sensors = VirtualSensors(make_script())
        near = sensors.emit(0, [truth(pos=(1.0, 0.0))], ROBOT, False, CountingRng(0))
        far = sensors.emit(1, [truth(pos=(4.0, 0.0))], ROBOT, False, CountingRng(0))
        wn = near.body_boxes["det_a_0"][2]
        wf = far.body_boxes["det_a_1"][2]
        assert wn == pytest.approx(4.0 * wf)

    def test_face_only_when_agent_faces_the_robot(self):
        sensors = VirtualSensors(make_script())
        toward = sensors.emit(0, [truth(orientation=math.pi)], ROBOT, False, CountingRng(0))
        away = sensors.emit(1, [truth(orientation=0.0)], ROBOT, False, CountingRng(0))
        assert len(toward.faces) == 1
        assert away.faces == ()

    def test_face_box_overlaps_its_body_box(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(orientation=math.pi)], ROBOT, False, CountingRng(0))
        pairs = face_body_likelihoods(frame)
        assert len(pairs) == 1
        face, source, likelihood = pairs[0]
        assert source == "det_a_0"
        # the face box sits fully inside the body box, so the likelihood
        # saturates at the 0.95 ceiling
        assert likelihood == pytest.approx(0.95)

    def test_disjoint_boxes_have_zero_overlap(self):
        assert bbox_overlap((0, 0, 10, 10), (20, 20, 5, 5)) == 0.0
        assert bbox_overlap((0, 0, 10, 10), (5, 0, 10, 10)) == pytest.approx(0.5)


class TestNoise:
    def test_position_noise_displaces_by_sigma_scale(self):
        cfg = SensorConfig(position_sigma=0.05)
        sensors = VirtualSensors(make_script(sensors=cfg))
        rng = CountingRng(3)
        errs = []
        for tick in range(200):
            frame = sensors.emit(tick, [truth()], ROBOT, False, rng)
            ox, oy = frame.detections[0].ground_pos
            errs.append(math.hypot(ox - 2.0, oy - 0.0))
        mean_err = float(np.mean(errs))
        # mean of a 2-d Rayleigh with sigma 0.05 is sigma * sqrt(pi/2)
        assert mean_err == pytest.approx(0.05 * math.sqrt(math.pi / 2), rel=0.25)

    def test_dropout_rate_matches_configuration(self):
        cfg = SensorConfig(dropout=0.3)
        sensors = VirtualSensors(make_script(sensors=cfg))
        rng = CountingRng(7)
        seen = sum(
            bool(sensors.emit(t, [truth()], ROBOT, False, rng).detections)
            for t in range(1000)
        )
        assert 0.62 < seen / 1000 < 0.78

    def test_zero_noise_consumes_no_rng_draws(self):
        sensors = VirtualSensors(make_script())
        rng = CountingRng(0)
        sensors.emit(0, [truth(speaking=True)], ROBOT, False, rng)
        assert rng.draws == 0

    def test_embeddings_stay_unit_norm_under_noise(self):
        cfg = SensorConfig(embedding_sigma=0.1)
        sensors = VirtualSensors(make_script(sensors=cfg))
        frame = sensors.emit(0, [truth(orientation=math.pi)], ROBOT, False, CountingRng(1))
        assert np.linalg.norm(frame.detections[0].embedding) == pytest.approx(1.0)
        assert np.linalg.norm(frame.faces[0].embedding) == pytest.approx(1.0)

    def test_same_seed_reproduces_identical_frames(self):
        cfg = SensorConfig(position_sigma=0.05, embedding_sigma=0.05, doa_sigma=0.02, dropout=0.1)
        frames = []
        for _ in range(2):
            sensors = VirtualSensors(make_script(sensors=cfg))
            rng = CountingRng(42)
            run = []
            for tick in range(50):
                frame = sensors.emit(tick, [truth(speaking=True, orientation=math.pi)], ROBOT, False, rng)
                run.append(frame)
            frames.append((run, rng.draws))
        assert frames[0][1] == frames[1][1]
        for fa, fb in zip(frames[0][0], frames[1][0]):
            assert len(fa.detections) == len(fb.detections)
            for da, db in zip(fa.detections, fb.detections):
                assert da.ground_pos == db.ground_pos
                assert np.array_equal(da.embedding, db.embedding)
            assert [v.doa for v in fa.voices] == [v.doa for v in fb.voices]


class TestMicrophone:
    def test_speaker_bearing_is_exact_without_noise(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(pos=(1.0, 1.0), speaking=True)], ROBOT, False, CountingRng(0))
        assert len(frame.voices) == 1
        assert frame.voices[0].doa == pytest.approx(math.pi / 4)
        assert frame.voices[0].id == voice_id("voice_a")

    def test_rear_half_plane_is_deaf(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(pos=(-1.0, 0.5), speaking=True)], ROBOT, False, CountingRng(0))
        assert frame.voices == ()

    def test_robot_speech_masks_all_voices(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(speaking=True)], ROBOT, True, CountingRng(0))
        assert frame.voices == ()

    def test_voice_heard_outside_camera_range(self):
        # hearing reaches beyond the 8 m camera limit as long as the speaker
        # stays in the frontal half-plane
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(pos=(9.0, 0.0), speaking=True)], ROBOT, False, CountingRng(0))
        assert frame.detections == ()
        assert len(frame.voices) == 1

    def test_voice_embedding_is_persistent_across_ticks(self):
        sensors = VirtualSensors(make_script())
        f0 = sensors.emit(0, [truth(speaking=True)], ROBOT, False, CountingRng(0))
        f1 = sensors.emit(1, [truth(speaking=True)], ROBOT, False, CountingRng(0))
        assert np.array_equal(f0.voices[0].embedding, f1.voices[0].embedding)
        assert f0.voices[0].embedding.shape == (VOICE_DIM,)


class TestIdentity:
    def test_embedding_dimensions(self):
        sensors = VirtualSensors(make_script())
        frame = sensors.emit(0, [truth(orientation=math.pi)], ROBOT, False, CountingRng(0))
        assert frame.detections[0].embedding.shape == (VISUAL_DIM,)
        assert frame.faces[0].embedding.shape == (VISUAL_DIM,)

    def test_different_seeds_give_distinct_embeddings(self):
        sensors = VirtualSensors(make_script(agent_ids=("a", "b")))
        ta = truth("a", pos=(2.0, 0.6), orientation=math.pi)
        tb = truth("b", pos=(2.0, -0.6), orientation=math.pi)
        frame = sensors.emit(0, [ta, tb], ROBOT, False, CountingRng(0))
        ea, eb = (d.embedding for d in frame.detections)
        assert abs(float(ea @ eb)) < 0.9

    def test_add_agent_registers_embeddings(self):
        sensors = VirtualSensors(make_script(agent_ids=()))
        sensors.add_agent("late", appearance_seed=9, voice_seed=9)
        frame = sensors.emit(0, [truth("late", speaking=True)], ROBOT, False, CountingRng(0))
        assert len(frame.detections) == 1
        assert len(frame.voices) == 1

    def test_counting_rng_tracks_vector_draws(self):
        rng = CountingRng(0)
        rng.normal(0.0, 1.0, (3, 2))
        rng.uniform()
        assert rng.draws == 7
