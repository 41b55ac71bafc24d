# cython: language_level=3
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: social cost fields and trajectory rollout scoring.

Mirror of fallback.py; keep the math in both files in lockstep.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, floor, hypot, sin, INFINITY

cnp.import_array()


def social_field(
    cnp.ndarray xx_in,
    cnp.ndarray yy_in,
    cnp.ndarray bodies_in,
    double sigma_front,
    double sigma_side,
    double sigma_rear,
    double k_v,
    double seated_scale,
):
    xx_b, yy_b = np.broadcast_arrays(xx_in, yy_in)
    cdef const double[:, ::1] xx = np.ascontiguousarray(xx_b, dtype=np.float64)
    cdef const double[:, ::1] yy = np.ascontiguousarray(yy_b, dtype=np.float64)
    cdef const double[:, ::1] bodies = np.ascontiguousarray(bodies_in, dtype=np.float64)
    cdef Py_ssize_t ny = xx.shape[0]
    cdef Py_ssize_t nx = xx.shape[1]
    cdef Py_ssize_t n = bodies.shape[0]
    out_arr = np.zeros((ny, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, r, c
    cdef double px, py, vx, vy, theta, seated, speed, scale, sf, ss, sr
    cdef double dx, dy, ct, st, xf, yf, sx, val
    for i in range(n):
        px = bodies[i, 0]
        py = bodies[i, 1]
        vx = bodies[i, 2]
        vy = bodies[i, 3]
        theta = bodies[i, 4]
        seated = bodies[i, 5]
        speed = hypot(vx, vy)
        scale = seated_scale if seated > 0.5 else 1.0
        sf = sigma_front * (1.0 + k_v * speed) * scale
        ss = sigma_side * scale
        sr = sigma_rear * scale
        ct = cos(theta)
        st = sin(theta)
        for r in range(ny):
            for c in range(nx):
                dx = xx[r, c] - px
                dy = yy[r, c] - py
                xf = ct * dx + st * dy
                yf = -st * dx + ct * dy
                sx = sf if xf >= 0.0 else sr
                out[r, c] += exp(
                    -0.5 * ((xf / sx) * (xf / sx) + (yf / ss) * (yf / ss))
                )
    return out_arr


def gaussian_field(
    cnp.ndarray xx_in,
    cnp.ndarray yy_in,
    cnp.ndarray centers_in,
    double sigma,
    double peak,
):
    xx_b, yy_b = np.broadcast_arrays(xx_in, yy_in)
    cdef const double[:, ::1] xx = np.ascontiguousarray(xx_b, dtype=np.float64)
    cdef const double[:, ::1] yy = np.ascontiguousarray(yy_b, dtype=np.float64)
    cdef const double[:, ::1] centers = np.ascontiguousarray(centers_in, dtype=np.float64)
    cdef Py_ssize_t ny = xx.shape[0]
    cdef Py_ssize_t nx = xx.shape[1]
    cdef Py_ssize_t n = centers.shape[0]
    out_arr = np.zeros((ny, nx), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double inv = -0.5 / (sigma * sigma)
    cdef Py_ssize_t i, r, c
    cdef double cx, cy, ddx, ddy, val
    for i in range(n):
        cx = centers[i, 0]
        cy = centers[i, 1]
        for r in range(ny):
            for c in range(nx):
                ddx = xx[r, c] - cx
                ddy = yy[r, c] - cy
                out[r, c] += peak * exp((ddx * ddx + ddy * ddy) * inv)
    return out_arr


def rollout_costs(
    cnp.ndarray x0_in,
    cnp.ndarray controls_in,
    double dt,
    cnp.ndarray field_in,
    cnp.ndarray occupied_in,
    cnp.ndarray origin_in,
    double resolution,
    cnp.ndarray goal_in,
    double w_goal,
    double w_social,
    double w_effort,
    double w_terminal,
):
    cdef const double[::1] x0 = np.ascontiguousarray(x0_in, dtype=np.float64)
    cdef const double[:, :, ::1] controls = np.ascontiguousarray(
        controls_in, dtype=np.float64
    )
    cdef const double[:, ::1] field = np.ascontiguousarray(field_in, dtype=np.float64)
    cdef const cnp.uint8_t[:, ::1] occupied = np.ascontiguousarray(
        occupied_in, dtype=np.uint8
    )
    cdef const double[::1] origin = np.ascontiguousarray(origin_in, dtype=np.float64)
    cdef const double[::1] goal = np.ascontiguousarray(goal_in, dtype=np.float64)
    cdef Py_ssize_t k = controls.shape[0]
    cdef Py_ssize_t horizon = controls.shape[1]
    cdef Py_ssize_t ny = field.shape[0]
    cdef Py_ssize_t nx = field.shape[1]
    cdef double ox = origin[0]
    cdef double oy = origin[1]
    cdef double gx = goal[0]
    cdef double gy = goal[1]
    costs_arr = np.empty(k, dtype=np.float64)
    cdef double[::1] costs = costs_arr
    cdef Py_ssize_t ci, t
    cdef double x, y, th, total, v, w, r, fx, fy, ax, ay, f, ddx, ddy
    cdef Py_ssize_t jx, jy, ix, iy, ix0, ix1, iy0, iy1
    cdef bint dead
    for ci in range(k):
        x = x0[0]
        y = x0[1]
        th = x0[2]
        total = 0.0
        dead = False
        for t in range(horizon):
            v = controls[ci, t, 0]
            w = controls[ci, t, 1]
            if w < 1e-6 and w > -1e-6:
                x += v * dt * cos(th)
                y += v * dt * sin(th)
            else:
                r = v / w
                x += r * (sin(th + w * dt) - sin(th))
                y += r * (-cos(th + w * dt) + cos(th))
            th += w * dt
            jx = <Py_ssize_t>floor((x - ox) / resolution)
            jy = <Py_ssize_t>floor((y - oy) / resolution)
            if jx < 0 or jy < 0 or jx >= nx or jy >= ny:
                dead = True
                break
            if occupied[jy, jx]:
                dead = True
                break
            fx = (x - ox) / resolution - 0.5
            fy = (y - oy) / resolution - 0.5
            ix = <Py_ssize_t>floor(fx)
            iy = <Py_ssize_t>floor(fy)
            ax = fx - ix
            ay = fy - iy
            ix0 = ix if ix >= 0 else 0
            if ix0 > nx - 1:
                ix0 = nx - 1
            ix1 = ix + 1 if ix + 1 >= 0 else 0
            if ix1 > nx - 1:
                ix1 = nx - 1
            iy0 = iy if iy >= 0 else 0
            if iy0 > ny - 1:
                iy0 = ny - 1
            iy1 = iy + 1 if iy + 1 >= 0 else 0
            if iy1 > ny - 1:
                iy1 = ny - 1
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
            costs[ci] = INFINITY
            continue
        ddx = x - gx
        ddy = y - gy
        total += w_terminal * (ddx * ddx + ddy * ddy)
        costs[ci] = total
    return costs_arr
