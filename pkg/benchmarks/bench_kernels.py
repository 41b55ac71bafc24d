"""Timing comparison between the compiled kernels and the numpy fallback.

Run directly:

    python3 benchmarks/bench_kernels.py

Prints per-kernel wall time for both backends and the speedup. Sizes mirror
the simulator defaults (8 m x 8 m grid at 5 cm, 36-candidate planner batch).
"""

import math
import time

import numpy as np

from socialscene.kernels import BACKEND, fallback

try:
    from socialscene.kernels import _core as core
except ImportError:
    core = None


def timed(fn, *args, repeats=5):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    rng = np.random.default_rng(0)
    nx = ny = 160
    resolution = 0.05
    xs = -4.0 + (np.arange(nx) + 0.5) * resolution
    ys = -4.0 + (np.arange(ny) + 0.5) * resolution
    xx, yy = np.meshgrid(xs, ys)

    bodies = np.empty((6, 6))
    bodies[:, 0] = rng.uniform(-3, 3, 6)
    bodies[:, 1] = rng.uniform(-3, 3, 6)
    bodies[:, 2:4] = rng.uniform(-0.5, 0.5, (6, 2))
    bodies[:, 4] = rng.uniform(-math.pi, math.pi, 6)
    bodies[:, 5] = rng.integers(0, 2, 6).astype(float)
    centers = rng.uniform(-3, 3, (2, 2))

    field = rng.uniform(0, 3, (ny, nx))
    occupied = np.zeros((ny, nx), dtype=np.uint8)
    x0 = np.array([0.0, 0.0, 0.0])
    controls = np.empty((36, 20, 2))
    controls[:, :, 0] = rng.uniform(-0.2, 0.6, (36, 20))
    controls[:, :, 1] = rng.uniform(-1, 1, (36, 20))
    origin = np.array([-4.0, -4.0])
    goal = np.array([2.0, 0.0])

    cases = [
        ("social_field", (xx, yy, bodies, 0.45, 0.45, 0.30, 0.8, 1.2)),
        ("gaussian_field", (xx, yy, centers, 0.9, 1.0)),
        (
            "rollout_costs",
            (x0, controls, 0.1, field, occupied, origin, resolution, goal, 2.0, 10.0, 0.1, 10.0),
        ),
    ]

    print(f"active backend: {BACKEND}")
    print(f"{'kernel':<16} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, args in cases:
        slow = timed(getattr(fallback, name), *args)
        if core is None:
            print(f"{name:<16} {slow * 1e3:>10.3f}ms {'n/a':>12} {'n/a':>9}")
            continue
        fast = timed(getattr(core, name), *args)
        print(f"{name:<16} {slow * 1e3:>10.3f}ms {fast * 1e3:>10.3f}ms {slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
