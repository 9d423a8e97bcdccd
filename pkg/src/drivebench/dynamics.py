"""Vehicle motion primitives: kinematic bicycle model, SE(2) frame
transforms and oriented-bounding-box overlap.

Conventions used throughout the package:
  * world frame is x-east / y-north, yaw measured counter-clockwise from +x
    and always wrapped to (-pi, pi]
  * a positive steer command turns the vehicle clockwise (to the right);
    lateral offsets are positive on the left
  * throttle in [0,1] maps linearly to acceleration, the brake flag applies
    a fixed deceleration; speed never goes negative
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels as K


@dataclass
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        self.yaw = wrap_angle(self.yaw)


@dataclass
class VehicleState:
    pose: Pose2D = field(default_factory=Pose2D)
    speed: float = 0.0

    def __post_init__(self):
        if self.speed < 0.0:
            self.speed = 0.0

    def as_array(self):
        return np.array([self.pose.x, self.pose.y, self.pose.yaw, self.speed])


@dataclass
class ControlCommand:
    steer: float = 0.0      # [-1, 1], positive steers right
    throttle: float = 0.0   # [0, 1]
    brake: bool = False

    def as_row(self):
        return (self.steer, self.throttle, 1.0 if self.brake else 0.0)


@dataclass
class BicycleParams:
    lf: float = 1.3
    lr: float = 1.3
    max_steer: float = 1.22        # rad at full steer command
    accel_max: float = 3.0         # m/s^2 at full throttle
    brake_decel: float = 6.0       # m/s^2 while braking
    speed_max: float = 20.0
    bbox_length: float = 4.5
    bbox_width: float = 2.0

    def as_array(self):
        return np.array([self.lf, self.lr, self.max_steer,
                         self.accel_max, self.brake_decel, self.speed_max])


def wrap_angle(a):
    """Wrap an angle to (-pi, pi]."""
    return K.wrap_angle(float(a))


def step_bicycle(state, cmd, params, dt):
    """Advance one vehicle state by dt under a control command."""
    x, y, yaw, v = K.bicycle_step_scalar(
        state.pose.x, state.pose.y, state.pose.yaw, state.speed,
        float(cmd.steer), float(cmd.throttle), 1.0 if cmd.brake else 0.0,
        params.lf, params.lr, params.max_steer,
        params.accel_max, params.brake_decel, params.speed_max, float(dt))
    return VehicleState(Pose2D(x, y, yaw), v)


def unroll(state, cmds, params, dt):
    """Apply a command sequence; returns the list of len(cmds)+1 states."""
    rows = np.array([c.as_row() for c in cmds], dtype=float).reshape(-1, 3)
    traj = K.bicycle_unroll(state.pose.x, state.pose.y, state.pose.yaw,
                            state.speed, rows, params.as_array(), float(dt))
    return [VehicleState(Pose2D(r[0], r[1], r[2]), r[3]) for r in traj]


def global_to_local(frame, point):
    """Express a world-frame (x,y) point in the frame of a pose."""
    dx = point[0] - frame.x
    dy = point[1] - frame.y
    c = math.cos(frame.yaw)
    s = math.sin(frame.yaw)
    return (c * dx + s * dy, -s * dx + c * dy)


def local_to_global(frame, point):
    """Inverse of global_to_local."""
    c = math.cos(frame.yaw)
    s = math.sin(frame.yaw)
    return (frame.x + c * point[0] - s * point[1],
            frame.y + s * point[0] + c * point[1])


def points_to_local(frame, pts):
    """Vectorized global_to_local for an (N,2) array."""
    pts = np.asarray(pts, dtype=float)
    c = math.cos(frame.yaw)
    s = math.sin(frame.yaw)
    dx = pts[:, 0] - frame.x
    dy = pts[:, 1] - frame.y
    return np.column_stack((c * dx + s * dy, -s * dx + c * dy))


def points_to_global(frame, pts):
    """Vectorized local_to_global for an (N,2) array."""
    pts = np.asarray(pts, dtype=float)
    c = math.cos(frame.yaw)
    s = math.sin(frame.yaw)
    return np.column_stack((frame.x + c * pts[:, 0] - s * pts[:, 1],
                            frame.y + s * pts[:, 0] + c * pts[:, 1]))


@dataclass
class OBB:
    cx: float
    cy: float
    yaw: float
    length: float
    width: float

    def corners(self):
        return K.obb_corners(self.cx, self.cy, self.yaw, self.length, self.width)


def vehicle_obb(state, params):
    return OBB(state.pose.x, state.pose.y, state.pose.yaw,
               params.bbox_length, params.bbox_width)


def obb_overlap(a, b):
    """True when two oriented boxes intersect (touching counts)."""
    return bool(K.obb_overlap(a.cx, a.cy, a.yaw, a.length, a.width,
                              b.cx, b.cy, b.yaw, b.length, b.width))


def copy_state(state):
    return VehicleState(Pose2D(state.pose.x, state.pose.y, state.pose.yaw),
                        state.speed)
