"""Privileged rule-based driver.

Picks one of four target speeds every tick (regular 8, intersection 5,
caution 2, stop 0 m/s) as the minimum over hazard rules, then tracks the
route with an aim-point steering PID and a speed PID. Hazard checks use
ground-truth scene state: a full-brake safety footprint projected down the
path, a constant-behavior rollout of every actor for collision forecasting,
pedestrian proximity, stop signs and traffic lights.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .dynamics import ControlCommand, OBB, global_to_local, vehicle_obb

EXPERT_SPEEDS = (8.0, 5.0, 2.0, 0.0)          # m/s
SPEED_CLASSES_KMH = (29.0, 18.0, 7.0, 0.0)    # rounded km/h class labels

ALL_RULES = frozenset({"intersection", "pedestrian", "stop_sign",
                       "red_light", "forecast", "safety_actors"})

# lower rank wins a tie at equal target speed
_REASON_RANK = {"stop_sign_on_trigger": 0, "red_light": 1,
                "collision_predicted": 2, "pedestrian_near": 3,
                "stop_sign_approach": 4, "intersection": 5, "regular": 6}


@dataclass
class ExpertConfig:
    speed_regular: float = EXPERT_SPEEDS[0]
    speed_intersection: float = EXPERT_SPEEDS[1]
    speed_caution: float = EXPERT_SPEEDS[2]
    pedestrian_radius: float = 30.0
    pedestrian_cone: float = math.radians(60.0)
    pedestrian_corridor: float = 3.5   # halfwidth around the route
    aim_min: float = 3.5
    forecast_horizon: float = 2.0
    forecast_dt: float = 0.05
    forecast_kp: float = 1.0
    kp_lat: float = 1.0
    ki_lat: float = 0.0
    kd_lat: float = 0.1
    ilim_lat: float = 10.0
    kp_lon: float = 1.0
    ki_lon: float = 0.05
    kd_lon: float = 0.0
    ilim_lon: float = 10.0
    brake_margin: float = 0.3
    stop_eps: float = 0.05
    serve_speed: float = 0.1
    treat_yellow_as_red: bool = True
    light_heading_tol: float = math.radians(45.0)


@dataclass
class ExpertRuntime:
    cursor: int = 0
    lat_integ: float = 0.0
    lat_prev: float = 0.0
    lon_integ: float = 0.0
    lon_prev: float = 0.0
    has_prev: float = 0.0
    served_signs: set = field(default_factory=set)


@dataclass
class ExpertDecision:
    target_speed: float
    reason: str
    speed_class: int
    hazard_time: float = -1.0


def speed_class_index(target_speed):
    """Index into the four speed classes for an expert target speed."""
    for i, s in enumerate(EXPERT_SPEEDS):
        if abs(target_speed - s) < 1e-9:
            return i
    raise ValueError(f"target speed {target_speed} is not one of {EXPERT_SPEEDS}")


def stopping_distance(speed):
    """Full-brake distance estimate in meters for a speed in m/s."""
    return 0.5 * ((speed * 3.6) / 10.0) ** 2 + 2.5


def lateral_aim(route, pose, cursor=0, aim_min=3.5):
    """First route vertex at least aim_min meters away, scanning forward of
    the cursor; the final vertex when none qualifies."""
    c = K.advance_cursor(route.path, cursor, pose.x, pose.y)
    idx = K.first_index_at_distance(route.path, c, pose.x, pose.y, aim_min)
    return route.path[idx].copy(), idx


def safety_box(world, cfg=None):
    """Ego bounding box posed where a full brake would come to rest: the
    pose reached after stopping_distance(speed) meters of driving along the
    route."""
    if cfg is None:
        cfg = ExpertConfig()
    ego = world.ego
    dist = stopping_distance(ego.speed)
    v_walk = max(ego.speed, 1.0)
    dt = cfg.forecast_dt
    step_len = v_walk * dt
    n_steps = max(int(math.ceil(dist / step_len)), 1)
    traj, _ = K.follow_path_const_speed(
        ego.pose.x, ego.pose.y, ego.pose.yaw, v_walk,
        world.route.path, world.cursor.index, n_steps, dt,
        world.ego_params.as_array(), cfg.forecast_kp, cfg.aim_min)
    # land exactly on the target arc distance with a partial last step
    frac = (dist - (n_steps - 1) * step_len) / step_len
    a = traj[n_steps - 1]
    b = traj[n_steps]
    x = a[0] + (b[0] - a[0]) * frac
    y = a[1] + (b[1] - a[1]) * frac
    yaw = K.wrap_angle(a[2] + K.wrap_angle(b[2] - a[2]) * frac)
    return OBB(x, y, yaw, world.ego_params.bbox_length,
               world.ego_params.bbox_width)


def _actor_arrays(world):
    actors = world.actors
    m = len(actors)
    state = np.empty((m, 4))
    cmd = np.empty((m, 3))
    geom = np.empty((m, 2))
    veh = np.empty((m, 6))
    for i, a in enumerate(actors):
        st = a.state
        state[i] = (st.pose.x, st.pose.y, st.pose.yaw, st.speed)
        cmd[i] = a.command_at(world.time).as_row()
        geom[i] = (a.params.bbox_length, a.params.bbox_width)
        veh[i] = a.params.as_array()
    return state, cmd, geom, veh


def predict_collision(world, cfg=None):
    """Constant-behavior forecast: ego follows the route at its current
    speed, every actor keeps its current command. Returns (time, actor_id)
    of the earliest box overlap within the horizon, or None."""
    if cfg is None:
        cfg = ExpertConfig()
    if not world.actors:
        return None
    state, cmd, geom, veh = _actor_arrays(world)
    n_steps = int(round(cfg.forecast_horizon / cfg.forecast_dt))
    ego = world.ego
    step, idx = K.forecast_first_collision(
        ego.pose.x, ego.pose.y, ego.pose.yaw, ego.speed,
        world.route.path, world.cursor.index,
        world.ego_params.bbox_length, world.ego_params.bbox_width,
        world.ego_params.as_array(), cfg.forecast_kp, cfg.aim_min,
        state, cmd, geom, veh, n_steps, cfg.forecast_dt)
    if step < 0:
        return None
    return step * cfg.forecast_dt, world.actors[idx].id


def _pedestrian_near(world, cfg):
    pose = world.ego.pose
    for a in world.actors:
        if a.kind != "pedestrian":
            continue
        lx, ly = global_to_local(pose, (a.state.pose.x, a.state.pose.y))
        dist = math.hypot(lx, ly)
        if dist > cfg.pedestrian_radius or lx <= 0.0:
            continue
        if abs(math.atan2(ly, lx)) > cfg.pedestrian_cone:
            continue
        # only pedestrians near the driving corridor matter
        _, lat, _ = K.nearest_on_polyline(
            world.route.path, world.route.cum_s,
            a.state.pose.x, a.state.pose.y,
            max(world.cursor.index - 5, 0), world.cursor.index + 60)
        if abs(lat) <= cfg.pedestrian_corridor:
            return True
    return False


def _light_active(light, t, cfg):
    phase = light.phase_at(t)
    if phase == "red":
        return True
    return phase == "yellow" and cfg.treat_yellow_as_red


def target_speed_decision(world, rt, cfg=None, rules=ALL_RULES):
    """Minimum target speed over the enabled hazard rules; ties break toward
    the harder rule. Also updates stop-sign serving state."""
    if cfg is None:
        cfg = ExpertConfig()
    candidates = [(cfg.speed_regular, "regular", -1.0)]
    ego = world.ego
    ego_box = vehicle_obb(ego, world.ego_params)
    ego_corners = ego_box.corners()
    sbox = safety_box(world, cfg)
    sbox_corners = sbox.corners()

    if "intersection" in rules:
        for poly in world.lane_map.intersections:
            if K.point_in_convex(np.asarray(poly, dtype=float),
                                 ego.pose.x, ego.pose.y):
                candidates.append((cfg.speed_intersection, "intersection", -1.0))
                break

    if "pedestrian" in rules and _pedestrian_near(world, cfg):
        candidates.append((cfg.speed_caution, "pedestrian_near", -1.0))

    if "stop_sign" in rules:
        for sign in world.signs:
            if sign.id in rt.served_signs:
                continue
            on_trigger = K.polys_overlap(ego_corners, sign.area)
            if on_trigger:
                if ego.speed < cfg.serve_speed:
                    rt.served_signs.add(sign.id)
                else:
                    candidates.append((0.0, "stop_sign_on_trigger", -1.0))
            elif K.polys_overlap(sbox_corners, sign.area):
                candidates.append((cfg.speed_caution, "stop_sign_approach", -1.0))

    if "red_light" in rules:
        hd = np.array([math.cos(ego.pose.yaw), math.sin(ego.pose.yaw)])
        for light in world.lights:
            if float(hd @ light.travel_dir) < math.cos(cfg.light_heading_tol):
                continue
            if not _light_active(light, world.time, cfg):
                continue
            if (K.polys_overlap(ego_corners, light.entrance)
                    or K.polys_overlap(sbox_corners, light.entrance)):
                candidates.append((0.0, "red_light", -1.0))

    if "safety_actors" in rules:
        for a in world.actors:
            if K.obb_overlap(sbox.cx, sbox.cy, sbox.yaw, sbox.length, sbox.width,
                             a.state.pose.x, a.state.pose.y, a.state.pose.yaw,
                             a.params.bbox_length, a.params.bbox_width):
                candidates.append((0.0, "collision_predicted", 0.0))
                break

    if "forecast" in rules:
        hit = predict_collision(world, cfg)
        if hit is not None:
            candidates.append((0.0, "collision_predicted", hit[0]))

    candidates.sort(key=lambda c: (c[0], _REASON_RANK[c[1]]))
    speed, reason, hazard_t = candidates[0]
    return ExpertDecision(speed, reason, speed_class_index(speed), hazard_t)


def drive_command(world, rt, target_speed, cfg=None):
    """Steering + throttle/brake toward a target speed along the route,
    sharing arithmetic with plan rollouts. Mutates the runtime PID state."""
    if cfg is None:
        cfg = ExpertConfig()
    ego = world.ego
    (steer, throttle, brake, cursor,
     rt.lat_integ, rt.lat_prev, rt.lon_integ, rt.lon_prev,
     rt.has_prev) = K.drive_path_command(
        ego.pose.x, ego.pose.y, ego.pose.yaw, ego.speed,
        world.route.path, rt.cursor, world.dt, target_speed, cfg.aim_min,
        cfg.kp_lat, cfg.ki_lat, cfg.kd_lat, cfg.ilim_lat,
        cfg.kp_lon, cfg.ki_lon, cfg.kd_lon, cfg.ilim_lon,
        cfg.brake_margin, cfg.stop_eps,
        rt.lat_integ, rt.lat_prev, rt.lon_integ, rt.lon_prev, rt.has_prev)
    rt.cursor = cursor
    return ControlCommand(steer, throttle, brake != 0.0)


def expert_act(world, rt, cfg=None):
    """One expert tick: hazard decision plus the command realizing it."""
    if cfg is None:
        cfg = ExpertConfig()
    decision = target_speed_decision(world, rt, cfg)
    cmd = drive_command(world, rt, decision.target_speed, cfg)
    return cmd, decision


def plan_rollout(world, rt, target_speed, cfg=None, horizon=2.0, stride=5):
    """Where the expert expects to be: roll the drive loop forward at the
    frozen target speed and sample every `stride` ticks. Returns (n, 2)
    world-frame positions (n = horizon/dt/stride)."""
    if cfg is None:
        cfg = ExpertConfig()
    n_steps = int(round(horizon / world.dt))
    ego = world.ego
    traj, _, _, _, _, _, _ = K.drive_path_unroll(
        ego.pose.x, ego.pose.y, ego.pose.yaw, ego.speed,
        world.route.path, rt.cursor, n_steps, world.dt,
        target_speed, world.ego_params.as_array(), cfg.aim_min,
        cfg.kp_lat, cfg.ki_lat, cfg.kd_lat, cfg.ilim_lat,
        cfg.kp_lon, cfg.ki_lon, cfg.kd_lon, cfg.ilim_lon,
        cfg.brake_margin, cfg.stop_eps,
        rt.lat_integ, rt.lat_prev, rt.lon_integ, rt.lon_prev, rt.has_prev)
    return traj[stride::stride, :2].copy()
