"""Backend parity tests: the compiled kernels must match the numpy fallback."""

import math

import numpy as np
import pytest

from socialscene import kernels
from socialscene.kernels import fallback

core = pytest.importorskip(
    "socialscene.kernels._core", reason="compiled extension not built"
)


def grid_coords(nx=60, ny=50, resolution=0.1, origin=(-3.0, -2.5)):
    xs = origin[0] + (np.arange(nx) + 0.5) * resolution
    ys = origin[1] + (np.arange(ny) + 0.5) * resolution
    return np.meshgrid(xs, ys)


def random_bodies(rng, n):
    bodies = np.empty((n, 6))
    bodies[:, 0] = rng.uniform(-2, 2, n)
    bodies[:, 1] = rng.uniform(-2, 2, n)
    bodies[:, 2] = rng.uniform(-0.8, 0.8, n)
    bodies[:, 3] = rng.uniform(-0.8, 0.8, n)
    bodies[:, 4] = rng.uniform(-math.pi, math.pi, n)
    bodies[:, 5] = rng.integers(0, 2, n).astype(float)
    return bodies


class TestSocialField:
    def test_matches_fallback(self):
        rng = np.random.default_rng(11)
        xx, yy = grid_coords()
        for n in (0, 1, 4, 9):
            bodies = random_bodies(rng, n)
            fast = core.social_field(xx, yy, bodies, 0.45, 0.45, 0.30, 0.8, 1.2)
            slow = fallback.social_field(xx, yy, bodies, 0.45, 0.45, 0.30, 0.8, 1.2)
            np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-12)

    def test_repeat_runs_identical(self):
        rng = np.random.default_rng(12)
        xx, yy = grid_coords()
        bodies = random_bodies(rng, 5)
        a = kernels.social_field(xx, yy, bodies, 0.45, 0.45, 0.30, 0.8, 1.2)
        b = kernels.social_field(xx, yy, bodies, 0.45, 0.45, 0.30, 0.8, 1.2)
        assert np.array_equal(a, b)


class TestGaussianField:
    def test_matches_fallback(self):
        rng = np.random.default_rng(13)
        xx, yy = grid_coords()
        for n in (0, 1, 3):
            centers = rng.uniform(-2, 2, (n, 2))
            fast = core.gaussian_field(xx, yy, centers, 0.9, 1.0)
            slow = fallback.gaussian_field(xx, yy, centers, 0.9, 1.0)
            np.testing.assert_allclose(fast, slow, rtol=0, atol=1e-12)


class TestRolloutCosts:
    @staticmethod
    def random_inputs(rng, k=40, horizon=20):
        nx, ny = 80, 70
        resolution = 0.1
        origin = np.array([-4.0, -3.5])
        field = rng.uniform(0.0, 3.0, (ny, nx))
        occupied = (rng.uniform(0, 1, (ny, nx)) < 0.03).astype(np.uint8)
        x0 = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-math.pi, math.pi)])
        controls = np.empty((k, horizon, 2))
        controls[:, :, 0] = rng.uniform(-0.2, 0.6, (k, horizon))
        controls[:, :, 1] = rng.uniform(-1.0, 1.0, (k, horizon))
        goal = rng.uniform(-2, 2, 2)
        return x0, controls, field, occupied, origin, resolution, goal

    def test_matches_fallback(self):
        rng = np.random.default_rng(14)
        for _ in range(5):
            x0, controls, field, occupied, origin, res, goal = self.random_inputs(rng)
            args = (x0, controls, 0.1, field, occupied, origin, res, goal, 2.0, 10.0, 0.1, 10.0)
            fast = core.rollout_costs(*args)
            slow = fallback.rollout_costs(*args)
            finite = np.isfinite(slow)
            assert np.array_equal(np.isfinite(fast), finite)
            np.testing.assert_allclose(fast[finite], slow[finite], rtol=1e-12)

    def test_accepts_read_only_arrays(self):
        rng = np.random.default_rng(15)
        x0, controls, field, occupied, origin, res, goal = self.random_inputs(rng, k=4)
        for arr in (x0, controls, field, occupied, origin, goal):
            arr.setflags(write=False)
        costs = core.rollout_costs(
            x0, controls, 0.1, field, occupied, origin, res, goal, 2.0, 10.0, 0.1, 10.0
        )
        assert costs.shape == (4,)

    def test_exercises_infeasible_branch(self):
        # A rollout that drives straight off the grid must cost inf in both.
        x0 = np.array([0.0, 0.0, 0.0])
        controls = np.full((1, 30, 2), [0.6, 0.0])
        field = np.zeros((10, 10))
        occupied = np.zeros((10, 10), dtype=np.uint8)
        origin = np.array([-0.5, -0.5])
        goal = np.array([5.0, 0.0])
        args = (x0, controls, 0.1, field, occupied, origin, 0.1, goal, 1.0, 1.0, 0.1, 1.0)
        assert math.isinf(core.rollout_costs(*args)[0])
        assert math.isinf(fallback.rollout_costs(*args)[0])


def test_active_backend_is_compiled():
    assert kernels.BACKEND == "cython"
    assert kernels.rollout_costs is core.rollout_costs
