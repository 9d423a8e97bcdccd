"""Closed-loop controllers that turn policy outputs into vehicle commands.

Two plan formats are supported: an 8-point waypoint plan at 250 ms spacing
(speed read off the plan geometry) and a 10-point path at 1 m spacing paired
with a 4-class speed distribution (speed read off the distribution).
Steering only ever consumes plan geometry, so speed predictions cannot bend
the trajectory. A small stop-sign memory can latch sign detections and force
a stop while the vehicle is over the sign even after detections drop out.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels as K
from .dynamics import ControlCommand
from .expert import SPEED_CLASSES_KMH

WAYPOINT_DT = 0.25          # plan spacing in seconds
CLASS_SPEEDS_MS = tuple(v / 3.6 for v in SPEED_CLASSES_KMH)
STOP_CLASS = 3


@dataclass
class PIDGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 10.0


@dataclass
class PIDState:
    integral: float = 0.0
    prev_err: float = 0.0
    has_prev: bool = False


def pid_step(state, gains, err, dt):
    """Textbook discrete PID with clamped integral; derivative is zero on
    the first sample."""
    if not state.has_prev:
        state.prev_err = err
        state.has_prev = True
    state.integral = min(max(state.integral + err * dt,
                             -gains.integral_limit), gains.integral_limit)
    out = (gains.kp * err + gains.ki * state.integral
           + gains.kd * (err - state.prev_err) / dt)
    state.prev_err = err
    return out


@dataclass
class ControllerConfig:
    aim_near: float = 2.25       # aim radius below the speed switch
    aim_far: float = 3.0
    aim_switch_speed: float = 5.5
    brake_threshold: float = 0.50
    speed_offset: float = 2.0    # subtracted from predicted speeds at inference
    stop_epsilon: float = 0.1
    brake_margin: float = 0.3
    argmax: bool = False         # most-likely-class speed instead of weighted
    stop_buffer: bool = False
    lat_gains: PIDGains = field(default_factory=lambda: PIDGains(1.0, 0.0, 0.1))
    lon_gains: PIDGains = field(default_factory=lambda: PIDGains(1.0, 0.05, 0.0))


def controller_preset(name):
    """validation: default brake threshold. dense: lower threshold tuned for
    heavy traffic."""
    if name == "validation":
        return ControllerConfig(brake_threshold=0.50)
    if name == "dense":
        return ControllerConfig(brake_threshold=0.33)
    raise ValueError(f"unknown preset: {name}")


@dataclass
class ControllerState:
    lat_pid: PIDState = field(default_factory=PIDState)
    lon_pid: PIDState = field(default_factory=PIDState)
    stop_buffer: "StopSignBuffer" = None

    def __post_init__(self):
        if self.stop_buffer is None:
            self.stop_buffer = StopSignBuffer()


@dataclass
class WaypointPlan:
    points: np.ndarray   # (8,2) ego frame, 250 ms apart

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.shape != (8, 2):
            raise ValueError(f"waypoint plan must be (8,2), got {self.points.shape}")


@dataclass
class PathPlan:
    points: np.ndarray   # (10,2) ego frame, 1 m apart

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.shape != (10, 2):
            raise ValueError(f"path plan must be (10,2), got {self.points.shape}")


@dataclass
class SpeedDistribution:
    probs: np.ndarray    # (4,) over class speeds 29/18/7/0 km/h

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (4,):
            raise ValueError("speed distribution needs 4 class probabilities")
        if np.any(self.probs < -1e-12):
            raise ValueError("negative class probability")
        s = float(self.probs.sum())
        if abs(s - 1.0) > 1e-6:
            raise ValueError(f"class probabilities sum to {s}, expected 1")

    @staticmethod
    def one_hot(idx):
        p = np.zeros(4)
        p[idx] = 1.0
        return SpeedDistribution(p)


def _aim_from_points(points, speed, cfg):
    """First plan point at least the speed-dependent aim radius away; the
    last point when none is."""
    a = cfg.aim_near if speed < cfg.aim_switch_speed else cfg.aim_far
    norms = np.hypot(points[:, 0], points[:, 1])
    idx = np.argmax(norms >= a) if np.any(norms >= a) else len(points) - 1
    return points[idx]


def _steer_toward(point, cfg, state, dt):
    bearing = math.atan2(point[1], point[0])
    out = pid_step(state.lat_pid, cfg.lat_gains, -bearing, dt)
    return min(max(out, -1.0), 1.0)


def longitudinal_command(speed, target, cfg, state, dt):
    """(throttle, brake) tracking a target speed; braking is a binary flag
    used when stopping or clearly over speed."""
    err = target - speed
    accel = pid_step(state.lon_pid, cfg.lon_gains, err, dt)
    brake = False
    if target < cfg.stop_epsilon and speed > cfg.stop_epsilon:
        brake = True
    elif speed > target + cfg.brake_margin:
        brake = True
    throttle = min(max(accel, 0.0), 1.0)
    if brake:
        throttle = 0.0
    return throttle, brake


def plan_target_speed(plan):
    """Speed implied by an 8-point waypoint plan: distance between the
    points half a second and one second ahead, divided by the half second
    between them."""
    pts = plan.points
    return float(np.linalg.norm(pts[3] - pts[1]) / (2.0 * WAYPOINT_DT))


def waypoint_controller(plan, speed, cfg, state, dt=0.05):
    """Follow an 8-point waypoint plan. Returns (command, target_speed)."""
    pts = plan.points
    # a collapsed plan means the planner wants a standstill
    if float(np.hypot(pts[-1, 0], pts[-1, 1])) < 0.2:
        return ControlCommand(0.0, 0.0, speed > cfg.stop_epsilon), 0.0
    target = plan_target_speed(plan)
    steer = _steer_toward(_aim_from_points(pts, speed, cfg), cfg, state, dt)
    if target < cfg.stop_epsilon:
        return ControlCommand(steer, 0.0, speed > cfg.stop_epsilon), target
    throttle, brake = longitudinal_command(speed, target, cfg, state, dt)
    return ControlCommand(steer, throttle, brake), target


def confidence_weighted_speed(dist, cfg):
    """Target speed from a 4-class speed distribution.

    Brake outright when the stop-class probability reaches the threshold.
    Otherwise weighted mode renormalizes the moving classes and takes their
    expected speed, argmax mode takes the most likely class speed; both are
    reduced by the inference offset and floored at zero.
    """
    p = dist.probs
    if p[STOP_CLASS] >= cfg.brake_threshold:
        return 0.0, True
    if cfg.argmax:
        cls = int(np.argmax(p))
        if cls == STOP_CLASS:
            return 0.0, True
        raw = CLASS_SPEEDS_MS[cls]
    else:
        moving = p[:STOP_CLASS]
        total = float(moving.sum())
        if total <= 0.0:
            return 0.0, True
        raw = float(moving @ np.asarray(CLASS_SPEEDS_MS[:STOP_CLASS])) / total
    return max(raw - cfg.speed_offset, 0.0), False


@dataclass
class StopSignBuffer:
    """Ego-frame memory of the last detected stop sign.

    Detections come and go; the buffered corners are advanced by the ego's
    own motion each tick so the sign stays registered even while occluded.
    force_brake holds while the ego footprint overlaps the buffered sign and
    no stop has been registered on it yet.
    """
    corners: np.ndarray = None   # (4,2) ego frame
    sign_id: int = -1
    served: bool = False

    def clear(self):
        self.corners = None
        self.sign_id = -1
        self.served = False


def stop_sign_buffer_step(buf, detections, motion_delta, speed,
                          ego_len=4.5, ego_wid=2.0, serve_speed=0.1):
    """Advance the sign memory one tick.

    detections: [(sign_id, (4,2) ego-frame corners)] currently visible.
    motion_delta: (dx, dy, dyaw) of the ego in its previous frame.
    Returns True while the controller must force a brake.
    """
    dx, dy, dyaw = motion_delta
    if buf.corners is not None:
        c = math.cos(-dyaw)
        s = math.sin(-dyaw)
        shifted = buf.corners - np.array([dx, dy])
        buf.corners = np.column_stack((c * shifted[:, 0] - s * shifted[:, 1],
                                       s * shifted[:, 0] + c * shifted[:, 1]))
    for sign_id, corners in detections:
        if sign_id != buf.sign_id:
            buf.sign_id = sign_id
            buf.served = False
        buf.corners = np.asarray(corners, dtype=float).copy()
    if buf.corners is None:
        return False
    ego_box = K.obb_corners(0.0, 0.0, 0.0, ego_len, ego_wid)
    on_sign = K.polys_overlap(ego_box, buf.corners)
    if on_sign and speed < serve_speed:
        buf.served = True
    # once the sign is far behind, forget it (served or not)
    if np.max(buf.corners[:, 0]) < -ego_len:
        buf.clear()
        return False
    if buf.served:
        return False
    return bool(on_sign)


def path_speed_controller(plan, dist, speed, cfg, state, dt=0.05,
                          detections=(), motion_delta=(0.0, 0.0, 0.0),
                          ego_len=4.5, ego_wid=2.0):
    """Follow a 10-point path with speed from a class distribution.
    Returns (command, target_speed)."""
    steer = _steer_toward(_aim_from_points(plan.points, speed, cfg),
                          cfg, state, dt)
    target, brake_now = confidence_weighted_speed(dist, cfg)
    if cfg.stop_buffer:
        forced = stop_sign_buffer_step(state.stop_buffer, detections,
                                       motion_delta, speed, ego_len, ego_wid)
        if forced:
            target, brake_now = 0.0, True
    if brake_now:
        return ControlCommand(steer, 0.0, speed > cfg.stop_epsilon), target
    throttle, brake = longitudinal_command(speed, target, cfg, state, dt)
    return ControlCommand(steer, throttle, brake), target
