"""Pure-python (numpy) implementations of the hot loops.

The compiled extension in ``_core.pyx`` implements the same three functions
with identical signatures and semantics. Keep the math in both files in
lockstep: the selection happens once at import time in ``__init__``.
"""

from __future__ import annotations

import numpy as np


def social_field(
    xx: np.ndarray,
    yy: np.ndarray,
    bodies: np.ndarray,
    sigma_front: float,
    sigma_side: float,
    sigma_rear: float,
    k_v: float,
    seated_scale: float,
) -> np.ndarray:
    """Accumulated asymmetric person-space cost over a grid.

    bodies is (n, 6): x, y, vx, vy, theta, seated_flag. Contributions add up,
    so overlapping social spaces reinforce each other.
    """
    out = np.zeros(np.broadcast(xx, yy).shape, dtype=np.float64)
    for i in range(bodies.shape[0]):
        px, py, vx, vy, theta, seated = bodies[i]
        speed = float(np.hypot(vx, vy))
        scale = seated_scale if seated > 0.5 else 1.0
        sf = sigma_front * (1.0 + k_v * speed) * scale
        ss = sigma_side * scale
        sr = sigma_rear * scale
        dx = xx - px
        dy = yy - py
        ct = np.cos(theta)
        st = np.sin(theta)
        xf = ct * dx + st * dy
        yf = -st * dx + ct * dy
        sx = np.where(xf >= 0.0, sf, sr)
        out += np.exp(-0.5 * ((xf / sx) ** 2 + (yf / ss) ** 2))
    return out


def gaussian_field(
    xx: np.ndarray,
    yy: np.ndarray,
    centers: np.ndarray,
    sigma: float,
    peak: float,
) -> np.ndarray:
    """Sum of isotropic Gaussians with the given peak amplitude."""
    out = np.zeros(np.broadcast(xx, yy).shape, dtype=np.float64)
    inv = -0.5 / (sigma * sigma)
    for i in range(centers.shape[0]):
        cx, cy = centers[i]
        out += peak * np.exp(((xx - cx) ** 2 + (yy - cy) ** 2) * inv)
    return out


def rollout_costs(
    x0: np.ndarray,
    controls: np.ndarray,
    dt: float,
    field: np.ndarray,
    occupied: np.ndarray,
    origin: np.ndarray,
    resolution: float,
    goal: np.ndarray,
    w_goal: float,
    w_social: float,
    w_effort: float,
    w_terminal: float,
) -> np.ndarray:
    """Cost of each candidate control sequence under exact unicycle rollout.

    controls is (k, T, 2) of (v, omega). field and occupied are (ny, nx)
    sampled at cell centers origin + (i + 0.5) * resolution. A rollout whose
    sample point leaves the grid or lands in an occupied cell costs inf.
    """
    k = controls.shape[0]
    horizon = controls.shape[1]
    ny, nx = field.shape
    ox, oy = float(origin[0]), float(origin[1])
    gx, gy = float(goal[0]), float(goal[1])
    costs = np.empty(k, dtype=np.float64)

    for ci in range(k):
        x, y, th = float(x0[0]), float(x0[1]), float(x0[2])
        total = 0.0
        dead = False
        for t in range(horizon):
            v = float(controls[ci, t, 0])
            w = float(controls[ci, t, 1])
            if abs(w) < 1e-6:
                x += v * dt * np.cos(th)
                y += v * dt * np.sin(th)
            else:
                r = v / w
                x += r * (np.sin(th + w * dt) - np.sin(th))
                y += r * (-np.cos(th + w * dt) + np.cos(th))
            th += w * dt
            jx = int(np.floor((x - ox) / resolution))
            jy = int(np.floor((y - oy) / resolution))
            if jx < 0 or jy < 0 or jx >= nx or jy >= ny:
                dead = True
                break
            if occupied[jy, jx]:
                dead = True
                break
            # bilinear over cell centers, corners clamped at the border
            fx = (x - ox) / resolution - 0.5
            fy = (y - oy) / resolution - 0.5
            ix = int(np.floor(fx))
            iy = int(np.floor(fy))
            ax = fx - ix
            ay = fy - iy
            ix0 = min(max(ix, 0), nx - 1)
            ix1 = min(max(ix + 1, 0), nx - 1)
            iy0 = min(max(iy, 0), ny - 1)
            iy1 = min(max(iy + 1, 0), ny - 1)
            f = (
                field[iy0, ix0] * (1 - ax) * (1 - ay)
                + field[iy0, ix1] * ax * (1 - ay)
                + field[iy1, ix0] * (1 - ax) * ay
                + field[iy1, ix1] * ax * ay
            )
            ddx = x - gx
            ddy = y - gy
            total += w_goal * (ddx * ddx + ddy * ddy)
            total += w_social * f
            total += w_effort * (v * v + w * w)
        if dead:
            costs[ci] = np.inf
            continue
        ddx = x - gx
        ddy = y - gy
        total += w_terminal * (ddx * ddx + ddy * ddy)
        costs[ci] = total
    return costs
