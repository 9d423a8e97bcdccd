"""Brute-force reference computations shared across test modules.

These deliberately avoid the library's geometry kernels: boxes are sampled
as dense point grids and containment is checked pointwise, so any bug in
the analytic overlap test cannot hide in its own oracle.
"""
import math

import numpy as np

from drivebench.world import ACTOR_DEFAULTS


def box_grid(length, width, step=0.05):
    xs = np.arange(-length / 2, length / 2 + 1e-9, step)
    ys = np.arange(-width / 2, width / 2 + 1e-9, step)
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def box_contains_any(cx, cy, yaw, length, width, pts):
    c, s = math.cos(yaw), math.sin(yaw)
    dx, dy = pts[:, 0] - cx, pts[:, 1] - cy
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    return bool(np.any((np.abs(lx) <= length / 2 + 1e-12)
                       & (np.abs(ly) <= width / 2 + 1e-12)))


def dense_first_hit(case, horizon=2.0, dt=0.005):
    """First contact time between two constant-velocity boxes, or None.

    Models the same situation a forecast fixture case encodes: the ego box
    (4.5 x 2.0) moving along +x from the origin at the case speed, and the
    actor box coasting along its heading. Sampled every `dt` seconds, which
    is ten times finer than the forecast under test.
    """
    v_e = case["ego_speed"]
    kind, ax, ay, ayaw, av = case["actor"]
    ap = ACTOR_DEFAULTS[kind]
    a_pts = box_grid(ap.bbox_length, ap.bbox_width)
    e_pts = box_grid(4.5, 2.0)
    ca, sa = math.cos(ayaw), math.sin(ayaw)
    rot = np.column_stack([a_pts @ np.array([ca, -sa]),
                           a_pts @ np.array([sa, ca])])
    for k in range(int(round(horizon / dt)) + 1):
        t = k * dt
        ex = v_e * t
        axx, ayy = ax + av * ca * t, ay + av * sa * t
        # centers further apart than the two circumscribed radii (at most
        # 2.46 m each for a vehicle) cannot touch
        if math.hypot(axx - ex, ayy) > 5.5:
            continue
        if box_contains_any(ex, 0.0, 0.0, 4.5, 2.0,
                            rot + np.array([axx, ayy])):
            return t
        if box_contains_any(axx, ayy, ayaw, ap.bbox_length, ap.bbox_width,
                            e_pts + np.array([ex, 0.0])):
            return t
    return None
