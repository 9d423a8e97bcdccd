"""Scene state and its deterministic update loop.

A scenario bundles the static description (lane map, route, initial actors,
traffic lights, stop signs, route-position triggers). make_world instantiates
mutable state from it; tick advances everything by one step and emits neutral
raw events (collisions, zone transitions, stop-line crossings) that the
metrics layer later classifies. All randomness flows through one
numpy Generator seeded per episode, so identical seeds replay identical
episodes bit for bit.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .dynamics import (BicycleParams, ControlCommand, Pose2D, VehicleState,
                       step_bicycle, vehicle_obb, wrap_angle)

GNSS_SIGMA_DEFAULT = 0.5585  # per-axis std in meters; mean 2D error ~0.7 m


@dataclass
class LaneMap:
    lanes: list                      # list of (N,2) float arrays
    lane_width: float = 3.5
    intersections: list = field(default_factory=list)  # convex (M,2) polygons


@dataclass
class RouteTrigger:
    s: float
    kind: str        # pedestrian_crossing | cyclist_cut_in | opposing_vehicle
    params: dict     # | spawn_vehicle | light_change


@dataclass
class Route:
    path: np.ndarray            # (N,2), ~1 m spacing
    cum_s: np.ndarray           # (N,)
    headings: np.ndarray        # (N,) segment heading per vertex
    target_points: np.ndarray   # (K,2)
    tp_s: np.ndarray            # (K,)

    @property
    def length(self):
        return float(self.cum_s[-1])


def resample_polyline(points, spacing=1.0):
    """Arc-length resample of a polyline; keeps the exact end point."""
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate(([True], seg > 1e-9))
    pts = pts[keep]
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = cum[-1]
    targets = np.arange(0.0, total, spacing)
    if total - targets[-1] > 1e-9:
        targets = np.concatenate((targets, [total]))
    out = np.column_stack((np.interp(targets, cum, pts[:, 0]),
                           np.interp(targets, cum, pts[:, 1])))
    return out


def _cum_and_headings(path):
    seg = np.diff(path, axis=0)
    lens = np.linalg.norm(seg, axis=1)
    cum = np.concatenate(([0.0], np.cumsum(lens)))
    hd = np.arctan2(seg[:, 1], seg[:, 0])
    hd = np.concatenate((hd, [hd[-1]]))
    return cum, hd


def make_route(path_points, target_points=None, tp_s=None):
    path = np.asarray(path_points, dtype=float)
    cum, hd = _cum_and_headings(path)
    if target_points is None:
        target_points = path[-1:].copy()
        tp_s = np.array([cum[-1]])
    return Route(path, cum, hd, np.asarray(target_points, dtype=float),
                 np.asarray(tp_s, dtype=float))


def point_at_s(route, s):
    s = min(max(s, 0.0), route.length)
    x = np.interp(s, route.cum_s, route.path[:, 0])
    y = np.interp(s, route.cum_s, route.path[:, 1])
    return np.array([x, y])


def heading_at_s(route, s):
    i = int(np.searchsorted(route.cum_s, min(max(s, 0.0), route.length),
                            side="right")) - 1
    i = min(max(i, 0), len(route.headings) - 1)
    return float(route.headings[i])


def build_route(lane_map, waypoint_seq, rng, tp_lo=20.0, tp_hi=50.0,
                spacing=1.0):
    """Resample a coarse waypoint sequence into a drivable route and place
    target points: random gaps in [tp_lo, tp_hi], one at every junction exit,
    one at the goal. Raises ValueError when the waypoints leave the mapped
    lanes."""
    path = resample_polyline(waypoint_seq, spacing)
    off_lane = 0
    for p in path[::5]:
        best = math.inf
        for lane in lane_map.lanes:
            lane = np.asarray(lane)
            cum = np.concatenate(([0.0],
                                  np.cumsum(np.linalg.norm(np.diff(lane, axis=0), axis=1))))
            _, lat, _ = K.nearest_on_polyline(lane, cum, p[0], p[1], 0, len(lane) - 1)
            best = min(best, abs(lat))
        if best > lane_map.lane_width:
            off_lane += 1
    if off_lane > 0:
        raise ValueError("waypoint sequence is not connectable along mapped lanes")

    cum, _ = _cum_and_headings(path)
    total = cum[-1]
    tp_list = []
    s = float(rng.uniform(tp_lo, tp_hi))
    while s < total - 5.0:
        tp_list.append(s)
        s += float(rng.uniform(tp_lo, tp_hi))
    # junction decision points: where the route leaves an intersection area
    for poly in lane_map.intersections:
        poly = np.asarray(poly, dtype=float)
        inside = np.array([K.point_in_convex(poly, p[0], p[1]) for p in path])
        for i in range(1, len(inside)):
            if inside[i - 1] and not inside[i]:
                tp_list.append(float(cum[i]))
    tp_list.append(total)
    tp_list = sorted(tp_list)
    dedup = []
    for s in tp_list:
        if not dedup or s - dedup[-1] > 3.0:
            dedup.append(s)
    tp_s = np.array(dedup)
    tps = np.column_stack((np.interp(tp_s, cum, path[:, 0]),
                           np.interp(tp_s, cum, path[:, 1])))
    hd = _cum_and_headings(path)[1]
    return Route(path, cum, hd, tps, tp_s)


@dataclass
class RouteCursor:
    index: int = 0
    s: float = 0.0


def route_progress(route, pose, cursor, window=80):
    """Project a pose onto the route near the cursor. Returns
    (s, signed_lateral, new_cursor); s never decreases across a run."""
    s, lat, seg = K.nearest_on_polyline(route.path, route.cum_s,
                                        pose.x, pose.y,
                                        cursor.index, cursor.index + window)
    if s < cursor.s:
        s = cursor.s
    return s, lat, RouteCursor(max(seg, cursor.index), s)


def completed_fraction(route, s):
    if route.length <= 0.0:
        return 1.0
    return min(s / route.length, 1.0)


def next_target_point(route, s, advance_eps=0.0):
    """First target point strictly ahead of s; the last one once past all."""
    idx = int(np.searchsorted(route.tp_s, s + advance_eps, side="right"))
    idx = min(idx, len(route.tp_s) - 1)
    return route.target_points[idx], float(route.tp_s[idx])


ACTOR_DEFAULTS = {
    "vehicle": BicycleParams(),
    "cyclist": BicycleParams(lf=0.6, lr=0.6, accel_max=2.0, speed_max=10.0,
                             bbox_length=1.8, bbox_width=0.6),
    "pedestrian": BicycleParams(lf=0.25, lr=0.25, accel_max=1.5, speed_max=3.0,
                                bbox_length=0.5, bbox_width=0.5),
    "static": BicycleParams(speed_max=0.0, bbox_length=4.5, bbox_width=2.0),
}


@dataclass
class Actor:
    id: int
    kind: str
    state: VehicleState
    params: BicycleParams
    schedule: list          # [(t_rel, ControlCommand)] sorted by t_rel
    spawn_time: float = 0.0

    def command_at(self, t):
        cmd = ControlCommand()
        for t0, c in self.schedule:
            if t - self.spawn_time >= t0 - 1e-12:
                cmd = c
            else:
                break
        return cmd


@dataclass
class TrafficLight:
    id: int
    stop_line: np.ndarray       # (2,2) endpoints
    travel_dir: np.ndarray      # (2,) unit vector of legal travel
    entrance: np.ndarray        # (4,2) convex area just before the line
    schedule: list              # [(phase, duration)] cycled
    offset: float = 0.0
    forced: str = ""

    def phase_at(self, t):
        if self.forced:
            return self.forced
        total = sum(d for _, d in self.schedule)
        if total <= 0.0:
            return self.schedule[0][0] if self.schedule else "green"
        m = (t + self.offset) % total
        for phase, dur in self.schedule:
            if m < dur:
                return phase
            m -= dur
        return self.schedule[-1][0]


@dataclass
class StopSign:
    id: int
    area: np.ndarray   # (4,2) trigger rectangle on the lane
    s: float           # route arc-length of the area center


@dataclass
class AmbiguityWindow:
    """Route interval where a speed-prediction surrogate mixes an alternative
    class distribution into its one-hot output. weight ramps 0 -> w_max
    linearly across [s_start, s_end] when ramp, else sits at w_max."""
    s_start: float
    s_end: float
    alt: tuple
    w_max: float = 1.0
    ramp: bool = True

    def weight(self, s):
        if s < self.s_start or s > self.s_end:
            return 0.0
        if not self.ramp or self.s_end <= self.s_start:
            return self.w_max
        return self.w_max * (s - self.s_start) / (self.s_end - self.s_start)


@dataclass
class RawEvent:
    kind: str
    time: float
    data: dict


@dataclass
class Scenario:
    name: str
    lane_map: LaneMap
    route: Route
    actors: list = field(default_factory=list)       # (kind, x, y, yaw, speed, schedule)
    lights: list = field(default_factory=list)
    signs: list = field(default_factory=list)
    triggers: list = field(default_factory=list)
    static_zones: list = field(default_factory=list)  # [(s0, s1)] roadside hazards
    ambiguity_windows: list = field(default_factory=list)
    disturbances: list = field(default_factory=list)  # [(route_s, lateral, heading)]
    gnss_sigma: float = GNSS_SIGMA_DEFAULT


@dataclass
class WorldState:
    scenario: Scenario
    ego: VehicleState
    ego_params: BicycleParams
    actors: list
    rng: np.random.Generator
    dt: float = 0.05
    time: float = 0.0
    tick_index: int = 0
    cursor: RouteCursor = field(default_factory=RouteCursor)
    ego_s: float = 0.0
    ego_lateral: float = 0.0
    last_gnss: tuple = (0.0, 0.0)
    in_contact: set = field(default_factory=set)
    on_sign: dict = field(default_factory=dict)       # sign id -> min speed seen
    pending_light_changes: list = field(default_factory=list)
    _line_side: dict = field(default_factory=dict)
    _next_id: int = 1000
    _next_trigger: int = 0

    @property
    def route(self):
        return self.scenario.route

    @property
    def lane_map(self):
        return self.scenario.lane_map

    @property
    def lights(self):
        return self.scenario.lights

    @property
    def signs(self):
        return self.scenario.signs


def make_world(scenario, seed, dt=0.05, start_speed=0.0):
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    start = point_at_s(scenario.route, 0.0)
    yaw = heading_at_s(scenario.route, 0.0)
    ego = VehicleState(Pose2D(start[0], start[1], yaw), start_speed)
    actors = []
    next_id = 0
    for spec in scenario.actors:
        kind, x, y, ayaw, speed, schedule = spec
        actors.append(Actor(next_id, kind,
                            VehicleState(Pose2D(x, y, ayaw), speed),
                            ACTOR_DEFAULTS[kind], list(schedule)))
        next_id += 1
    w = WorldState(scenario=scenario, ego=ego, ego_params=BicycleParams(),
                   actors=actors, rng=rng, dt=dt)
    w._next_id = next_id + 1000
    s, lat, cur = route_progress(scenario.route, ego.pose, w.cursor)
    w.ego_s, w.ego_lateral, w.cursor = s, lat, cur
    # prime the stop-line side tracker
    for light in scenario.lights:
        w._line_side[light.id] = _line_signed_position(light, ego.pose)
    w.last_gnss = gnss_sample(w)
    return w


def gnss_sample(world):
    """Noisy ego position: i.i.d. Gaussian per axis."""
    sigma = world.scenario.gnss_sigma
    return (world.ego.pose.x + sigma * world.rng.standard_normal(),
            world.ego.pose.y + sigma * world.rng.standard_normal())


def _line_signed_position(light, pose):
    mid = 0.5 * (light.stop_line[0] + light.stop_line[1])
    return ((pose.x - mid[0]) * light.travel_dir[0]
            + (pose.y - mid[1]) * light.travel_dir[1])


def _within_line_extent(light, pose):
    p0, p1 = light.stop_line[0], light.stop_line[1]
    d = p1 - p0
    l2 = float(d @ d)
    if l2 <= 0.0:
        return False
    t = ((pose.x - p0[0]) * d[0] + (pose.y - p0[1]) * d[1]) / l2
    return -0.1 <= t <= 1.1


def _jittered(params, rng):
    out = dict(params)
    jit = out.pop("jitter", None)
    if jit:
        for key, halfrange in jit.items():
            if key in out:
                out[key] = out[key] + float(rng.uniform(-halfrange, halfrange))
    return out


def _spawn_from_route(world, s, lateral, heading_rel, kind, speed, schedule):
    route = world.route
    base = point_at_s(route, s)
    hd = heading_at_s(route, s)
    # lateral positive = left of the travel direction
    x = base[0] - math.sin(hd) * lateral
    y = base[1] + math.cos(hd) * lateral
    yaw = wrap_angle(hd + heading_rel)
    actor = Actor(world._next_id, kind,
                  VehicleState(Pose2D(x, y, yaw), speed),
                  ACTOR_DEFAULTS[kind], schedule, spawn_time=world.time)
    world._next_id += 1
    world.actors.append(actor)
    return actor


def _fire_trigger(world, trig):
    events = []
    p = _jittered(trig.params, world.rng)
    kind = trig.kind
    if kind == "pedestrian_crossing":
        side = p.get("side", 1.0)
        actor = _spawn_from_route(
            world, trig.s + p.get("ahead", 25.0), side * p.get("offset", 4.5),
            -side * math.pi / 2.0, "pedestrian", p.get("speed", 1.4),
            [(0.0, ControlCommand())])
    elif kind == "cyclist_cut_in":
        side = p.get("side", 1.0)
        steer = side * p.get("cut_steer", 0.12)
        t0 = p.get("cut_delay", 1.0)
        dur = p.get("cut_duration", 1.4)
        schedule = [(0.0, ControlCommand()),
                    (t0, ControlCommand(steer=steer)),
                    (t0 + dur, ControlCommand(steer=-steer)),
                    (t0 + 2.0 * dur, ControlCommand())]
        if p.get("exit_delay") is not None:
            # after lingering in the lane the cyclist pulls off to the far side
            te = t0 + 2.0 * dur + p["exit_delay"]
            es = side * p.get("exit_steer", 0.1)
            ed = p.get("exit_duration", 1.4)
            schedule += [(te, ControlCommand(steer=es)),
                         (te + ed, ControlCommand(steer=-es)),
                         (te + 2.0 * ed, ControlCommand())]
        actor = _spawn_from_route(
            world, trig.s + p.get("ahead", 30.0), side * p.get("offset", 3.2),
            0.0, "cyclist", p.get("speed", 4.0), schedule)
    elif kind == "cyclist_cut_stall":
        # cuts into the lane, brakes to a standstill, then pulls away
        side = p.get("side", 1.0)
        steer = side * p.get("cut_steer", 0.14)
        t0 = p.get("cut_delay", 0.5)
        dur = p.get("cut_duration", 1.2)
        tb = t0 + 2.0 * dur
        tr = tb + p.get("stand", 6.0)
        es = side * p.get("exit_steer", 0.12)
        ed = p.get("exit_duration", 1.6)
        actor = _spawn_from_route(
            world, trig.s + p.get("ahead", 30.0), side * p.get("offset", 2.9),
            0.0, "cyclist", p.get("speed", 3.5),
            [(0.0, ControlCommand()),
             (t0, ControlCommand(steer=steer)),
             (t0 + dur, ControlCommand(steer=-steer)),
             (tb, ControlCommand(brake=True)),
             (tr, ControlCommand(steer=es, throttle=0.6)),
             (tr + ed, ControlCommand(steer=-es, throttle=0.4)),
             (tr + 2.0 * ed, ControlCommand())])
    elif kind == "opposing_vehicle":
        actor = _spawn_from_route(
            world, trig.s + p.get("ahead", 60.0), p.get("offset", 3.5),
            math.pi, "vehicle", p.get("speed", 8.0),
            [(0.0, ControlCommand())])
    elif kind == "spawn_vehicle":
        actor = _spawn_from_route(
            world, trig.s + p.get("ahead", 30.0), p.get("offset", 0.0),
            p.get("heading_rel", 0.0), "vehicle", p.get("speed", 0.0),
            [(0.0, ControlCommand())])
    elif kind == "light_change":
        when = world.time + p.get("delay", 0.0)
        world.pending_light_changes.append((when, int(p["light"]), p["phase"]))
    else:
        raise ValueError(f"unknown trigger kind: {kind}")
    events.append(RawEvent("trigger_fired", world.time,
                           {"kind": kind, "s": trig.s}))
    return events


def tick(world, ego_cmd):
    """Advance the world one step under the ego command. Returns the raw
    events produced during the step."""
    events = []
    world.time += world.dt
    world.tick_index += 1
    t = world.time

    for when, light_id, phase in list(world.pending_light_changes):
        if t >= when - 1e-12:
            for light in world.lights:
                if light.id == light_id:
                    light.forced = phase
            world.pending_light_changes.remove((when, light_id, phase))

    world.ego = step_bicycle(world.ego, ego_cmd, world.ego_params, world.dt)
    for actor in world.actors:
        cmd = actor.command_at(t)
        actor.state = step_bicycle(actor.state, cmd, actor.params, world.dt)

    s, lat, cur = route_progress(world.route, world.ego.pose, world.cursor)
    world.ego_s, world.ego_lateral, world.cursor = s, lat, cur

    trigs = sorted(world.scenario.triggers, key=lambda tr: tr.s)
    while world._next_trigger < len(trigs) and trigs[world._next_trigger].s <= s:
        events.extend(_fire_trigger(world, trigs[world._next_trigger]))
        world._next_trigger += 1

    world.last_gnss = gnss_sample(world)

    ego_box = vehicle_obb(world.ego, world.ego_params)
    for actor in world.actors:
        hit = K.obb_overlap(ego_box.cx, ego_box.cy, ego_box.yaw,
                            ego_box.length, ego_box.width,
                            actor.state.pose.x, actor.state.pose.y,
                            actor.state.pose.yaw,
                            actor.params.bbox_length, actor.params.bbox_width)
        if hit and actor.id not in world.in_contact:
            world.in_contact.add(actor.id)
            events.append(RawEvent("collision", t,
                                   {"actor_id": actor.id, "actor_kind": actor.kind}))
        elif not hit and actor.id in world.in_contact:
            world.in_contact.remove(actor.id)

    corners = ego_box.corners()
    for sign in world.signs:
        on = K.polys_overlap(corners, sign.area)
        if on:
            if sign.id not in world.on_sign:
                world.on_sign[sign.id] = world.ego.speed
                events.append(RawEvent("stop_zone_enter", t, {"sign_id": sign.id}))
            else:
                world.on_sign[sign.id] = min(world.on_sign[sign.id],
                                             world.ego.speed)
        elif sign.id in world.on_sign:
            events.append(RawEvent("stop_zone_exit", t,
                                   {"sign_id": sign.id,
                                    "min_speed": world.on_sign.pop(sign.id)}))

    for light in world.lights:
        side = _line_signed_position(light, world.ego.pose)
        prev = world._line_side.get(light.id, side)
        if prev < 0.0 <= side and _within_line_extent(light, world.ego.pose):
            events.append(RawEvent("stop_line_crossed", t,
                                   {"light_id": light.id,
                                    "phase": light.phase_at(t)}))
        world._line_side[light.id] = side

    return events


def visible_signs(world, vis_min=6.0, vis_max=18.0, cone=math.radians(75)):
    """Detector stand-in for stop signs: a sign is reported while its area
    center sits ahead of the ego inside [vis_min, vis_max] meters and within
    a bearing cone. Closer than vis_min it drops out (hood occlusion)."""
    out = []
    pose = world.ego.pose
    c, sn = math.cos(pose.yaw), math.sin(pose.yaw)
    for sign in world.signs:
        cx = float(np.mean(sign.area[:, 0]))
        cy = float(np.mean(sign.area[:, 1]))
        dx, dy = cx - pose.x, cy - pose.y
        lx = c * dx + sn * dy
        ly = -sn * dx + c * dy
        dist = math.hypot(lx, ly)
        if dist < vis_min or dist > vis_max or lx <= 0.0:
            continue
        if abs(math.atan2(ly, lx)) > cone:
            continue
        local = np.column_stack((c * (sign.area[:, 0] - pose.x) + sn * (sign.area[:, 1] - pose.y),
                                 -sn * (sign.area[:, 0] - pose.x) + c * (sign.area[:, 1] - pose.y)))
        out.append((sign.id, local))
    return out


# ---------------------------------------------------------------------------
# scenario (de)serialization; plain JSON, floats round-trip bit-exactly


def _cmd_to_list(item):
    t, cmd = item
    return [t, cmd.steer, cmd.throttle, 1 if cmd.brake else 0]


def _cmd_from_list(row):
    return (float(row[0]), ControlCommand(float(row[1]), float(row[2]),
                                          bool(row[3])))


def scenario_to_dict(sc):
    return {
        "name": sc.name,
        "lane_width": sc.lane_map.lane_width,
        "lanes": [np.asarray(l).tolist() for l in sc.lane_map.lanes],
        "intersections": [np.asarray(p).tolist() for p in sc.lane_map.intersections],
        "route": sc.route.path.tolist(),
        "target_points": sc.route.target_points.tolist(),
        "target_point_s": sc.route.tp_s.tolist(),
        "actors": [[a[0], a[1], a[2], a[3], a[4],
                    [_cmd_to_list(k) for k in a[5]]] for a in sc.actors],
        "lights": [{"id": l.id, "stop_line": l.stop_line.tolist(),
                    "travel_dir": l.travel_dir.tolist(),
                    "entrance": l.entrance.tolist(),
                    "schedule": [[p, d] for p, d in l.schedule],
                    "offset": l.offset} for l in sc.lights],
        "signs": [{"id": s.id, "area": s.area.tolist(), "s": s.s}
                  for s in sc.signs],
        "triggers": [{"s": t.s, "kind": t.kind, "params": t.params}
                     for t in sc.triggers],
        "static_zones": [list(z) for z in sc.static_zones],
        "ambiguity_windows": [{"s_start": w.s_start, "s_end": w.s_end,
                               "alt": list(w.alt), "w_max": w.w_max,
                               "ramp": w.ramp} for w in sc.ambiguity_windows],
        "disturbances": [list(d) for d in sc.disturbances],
        "gnss_sigma": sc.gnss_sigma,
    }


def scenario_from_dict(d):
    lane_map = LaneMap([np.array(l, dtype=float) for l in d["lanes"]],
                       float(d["lane_width"]),
                       [np.array(p, dtype=float) for p in d["intersections"]])
    path = np.array(d["route"], dtype=float)
    cum, hd = _cum_and_headings(path)
    route = Route(path, cum, hd,
                  np.array(d["target_points"], dtype=float),
                  np.array(d["target_point_s"], dtype=float))
    actors = [(a[0], float(a[1]), float(a[2]), float(a[3]), float(a[4]),
               [_cmd_from_list(k) for k in a[5]]) for a in d["actors"]]
    lights = [TrafficLight(int(l["id"]), np.array(l["stop_line"], dtype=float),
                           np.array(l["travel_dir"], dtype=float),
                           np.array(l["entrance"], dtype=float),
                           [(p, float(dur)) for p, dur in l["schedule"]],
                           float(l.get("offset", 0.0)))
              for l in d["lights"]]
    signs = [StopSign(int(s["id"]), np.array(s["area"], dtype=float),
                      float(s["s"])) for s in d["signs"]]
    triggers = [RouteTrigger(float(t["s"]), t["kind"], t["params"])
                for t in d["triggers"]]
    windows = [AmbiguityWindow(float(w["s_start"]), float(w["s_end"]),
                               tuple(w["alt"]), float(w.get("w_max", 1.0)),
                               bool(w.get("ramp", True)))
               for w in d.get("ambiguity_windows", [])]
    return Scenario(name=d.get("name", "scenario"), lane_map=lane_map,
                    route=route, actors=actors, lights=lights, signs=signs,
                    triggers=triggers,
                    static_zones=[tuple(z) for z in d.get("static_zones", [])],
                    ambiguity_windows=windows,
                    disturbances=[tuple(x) for x in d.get("disturbances", [])],
                    gnss_sigma=float(d.get("gnss_sigma", GNSS_SIGMA_DEFAULT)))


def save_scenario(sc, path):
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(sc), fh)


def load_scenario(path):
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))
