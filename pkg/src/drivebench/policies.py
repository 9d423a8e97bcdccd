"""Synthetic driving policies that reproduce known failure modes of learned
agents under different goal-conditioning schemes.

None of these are trained models. Each one is a hand-written behavioral
surrogate whose closed-loop behavior isolates one mechanism:

  expert_policy      relabels the privileged driver's own plan as policy
                     outputs (waypoints, path, one-hot speed class).
  shortcut_policy    target-point conditioning: follows the lane while the
                     lateral error looks like training data, but once out of
                     distribution it blends its heading toward the next
                     target point. That geometric shortcut both recovers
                     from disturbances (when the target point is near) and
                     cuts corners (when it lies past a turn).
  nc_policy          discrete-command conditioning: replays the route's
                     curvature by odometer with a small persistent heading
                     bias and no lateral-error feedback, so injected offsets
                     are never steered out.
  uncertain_speed_policy  expert path with a speed distribution that blends
                     toward an alternative hypothesis inside configured
                     ambiguity windows (a light about to change, a cyclist
                     that may pull out).

apply_disturbance teleports the ego sideways mid-route; probing harnesses
use it to compare recovery across conditioning schemes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .controllers import PathPlan, SpeedDistribution, WaypointPlan
from .dynamics import Pose2D, points_to_local, wrap_angle
from .expert import (ExpertConfig, ExpertRuntime, expert_act, plan_rollout,
                     target_speed_decision)
from .world import RawEvent, heading_at_s, next_target_point, route_progress, visible_signs

NOMINAL_SPEED = 8.0
PLAN_LEN = 8
PATH_LEN = 10


@dataclass
class Conditioning:
    kind: str                  # "tp" | "nc"
    tp_local: tuple = (0.0, 0.0)
    nc: str = "follow"


@dataclass
class PolicyOutput:
    waypoints: WaypointPlan = None
    path: PathPlan = None
    speed_dist: SpeedDistribution = None
    detections: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


def route_path_plan(world, n=PATH_LEN, spacing=1.0):
    """Next `n` route points at exact 1 m chord spacing, ego frame."""
    ego = world.ego
    pts = K.chord_resample(world.route.path, world.cursor.index,
                           ego.pose.x, ego.pose.y, spacing, n)
    return points_to_local(ego.pose, pts)


def _ray_waypoints(angle_per_point, step):
    """Cumulative ego-frame waypoints; angle_per_point gives the direction
    of travel for each of the 8 segments."""
    pts = np.empty((PLAN_LEN, 2))
    x = y = 0.0
    for k in range(PLAN_LEN):
        a = angle_per_point[k]
        x += step * math.cos(a)
        y += step * math.sin(a)
        pts[k] = (x, y)
    return pts


class ExpertPolicy:
    """Privileged driver exposed through the policy interface. The command
    comes from the expert itself; waypoints are its own plan rollout."""

    def __init__(self, cfg=None):
        self.cfg = cfg or ExpertConfig()
        self.rt = ExpertRuntime()

    def reset(self, world, rng=None):
        self.rt = ExpertRuntime()

    def act(self, world):
        cmd, decision = expert_act(world, self.rt, self.cfg)
        plan_world = plan_rollout(world, self.rt, decision.target_speed,
                                  self.cfg)
        wp = points_to_local(world.ego.pose, plan_world)
        out = PolicyOutput(
            waypoints=WaypointPlan(wp),
            path=PathPlan(route_path_plan(world)),
            speed_dist=SpeedDistribution.one_hot(decision.speed_class),
            info={"decision": decision})
        return cmd, out


class ShortcutPolicy:
    """Target-point conditioned surrogate.

    In distribution (|lateral error| <= ood_delta) it emits lane-following
    waypoints sampled along the route. Out of distribution it emits a
    straight ray whose direction is the unit blend
    (1-lam)*lane_direction + lam*direction_to_target_point: the learned
    shortcut that steers toward wherever the next target point is.
    """

    def __init__(self, lam=0.8, ood_delta=0.75, speed=NOMINAL_SPEED):
        self.lam = lam
        self.ood_delta = ood_delta
        self.speed = speed

    def reset(self, world, rng=None):
        pass

    def act(self, world):
        ego = world.ego
        s = world.ego_s
        lat = world.ego_lateral
        step = self.speed * 0.25
        tp, _ = next_target_point(world.route, s)
        tpl = points_to_local(ego.pose, tp.reshape(1, 2))[0]
        tp_bearing = math.atan2(tpl[1], tpl[0])
        ood = abs(lat) > self.ood_delta
        if not ood:
            pts = K.chord_resample(world.route.path, world.cursor.index,
                                   ego.pose.x, ego.pose.y, step, PLAN_LEN)
            wp = points_to_local(ego.pose, pts)
        else:
            lane_hd = wrap_angle(heading_at_s(world.route, s) - ego.pose.yaw)
            ux = (1.0 - self.lam) * math.cos(lane_hd) + self.lam * math.cos(tp_bearing)
            uy = (1.0 - self.lam) * math.sin(lane_hd) + self.lam * math.sin(tp_bearing)
            ang = math.atan2(uy, ux)
            wp = _ray_waypoints([ang] * PLAN_LEN, step)
        return PolicyOutput(waypoints=WaypointPlan(wp),
                            info={"ood": ood, "tp_bearing": tp_bearing})


class NcPolicy:
    """Discrete-command conditioned surrogate.

    Knows what maneuver comes next (the route's heading profile indexed by
    its own odometer) but has no lateral-error feedback: plans are built
    relative to the current heading, bent by the upcoming route curvature
    plus a persistent bias. A lateral or heading offset therefore persists
    instead of being steered out.
    """

    def __init__(self, bias=math.radians(0.3), speed=NOMINAL_SPEED):
        self.bias = bias
        self.speed = speed
        self.odometer = 0.0
        self._cum = None
        self._heading = None

    def reset(self, world, rng=None):
        self.odometer = 0.0
        self._cum = world.route.cum_s
        self._heading = np.unwrap(world.route.headings)

    def _route_heading(self, s):
        return float(np.interp(s, self._cum, self._heading))

    def act(self, world):
        v = world.ego.speed
        self.odometer += v * world.dt
        h0 = self._route_heading(self.odometer)
        step = self.speed * 0.25
        angles = []
        for k in range(PLAN_LEN):
            sk = self.odometer + (k + 1) * step
            angles.append(self._route_heading(sk) - h0 + self.bias)
        wp = _ray_waypoints(angles, step)
        return PolicyOutput(waypoints=WaypointPlan(wp),
                            info={"odometer": self.odometer})


# rules a speed-prediction surrogate is allowed to "see": static road
# context it could learn from images, not privileged dynamic state
VISIBLE_RULES = frozenset({"intersection", "red_light", "stop_sign"})


class UncertainSpeedPolicy:
    """Path + speed-class surrogate with tunable ambiguity.

    The path output is the ground-truth route ahead. The speed distribution
    is the one-hot class of a context-rule decision (no privileged actor
    forecasting), blended toward each ambiguity window's alternative
    distribution by the window weight. Sign detections are forwarded for
    controllers that buffer them.
    """

    def __init__(self, cfg=None, rules=VISIBLE_RULES, see_signs=True,
                 detector_range=(6.0, 18.0), dwell_hold=4.0, dwell_fade=4.0):
        self.cfg = cfg or ExpertConfig()
        self.rules = frozenset(rules)
        if not see_signs:
            self.rules = self.rules - {"stop_sign"}
        self.detector_range = detector_range
        # ambiguity resolves after watching the scene a while; without this a
        # vehicle braked to a stop inside a window would never move again
        self.dwell_hold = dwell_hold
        self.dwell_fade = dwell_fade
        self.rt = ExpertRuntime()
        self._dwell = {}

    def reset(self, world, rng=None):
        self.rt = ExpertRuntime()
        self._dwell = {}

    def act(self, world):
        decision = target_speed_decision(world, self.rt, self.cfg,
                                         rules=self.rules)
        base = np.zeros(4)
        base[decision.speed_class] = 1.0
        w_best, alt = 0.0, None
        for i, win in enumerate(world.scenario.ambiguity_windows):
            w = win.weight(world.ego_s)
            if w > 0.0:
                dwell = self._dwell.get(i, 0.0) + world.dt
                self._dwell[i] = dwell
                if dwell > self.dwell_hold:
                    fade = 1.0 - (dwell - self.dwell_hold) / self.dwell_fade
                    w *= max(fade, 0.0)
            if w > w_best:
                w_best, alt = w, np.asarray(win.alt, dtype=float)
        probs = base if alt is None else (1.0 - w_best) * base + w_best * alt
        dist = SpeedDistribution(probs / probs.sum())
        detections = visible_signs(world, self.detector_range[0],
                                   self.detector_range[1])
        return PolicyOutput(path=PathPlan(route_path_plan(world)),
                            speed_dist=dist,
                            detections=detections,
                            info={"decision": decision, "ambiguity": w_best})


def make_policy(name, **kwargs):
    table = {"expert": ExpertPolicy, "shortcut": ShortcutPolicy,
             "nc": NcPolicy, "uncertain": UncertainSpeedPolicy}
    if name not in table:
        raise ValueError(f"unknown policy '{name}' (choose from {sorted(table)})")
    return table[name](**kwargs)


def apply_disturbance(world, lateral, heading_error):
    """Teleport the ego sideways relative to the route (left positive) and
    twist its heading. Returns the raw event describing what happened."""
    hd = heading_at_s(world.route, world.ego_s)
    pose = world.ego.pose
    world.ego.pose = Pose2D(pose.x - math.sin(hd) * lateral,
                            pose.y + math.cos(hd) * lateral,
                            wrap_angle(pose.yaw + heading_error))
    s, lat, cur = route_progress(world.route, world.ego.pose, world.cursor)
    world.ego_s, world.ego_lateral, world.cursor = s, lat, cur
    return RawEvent("disturbance", world.time,
                    {"lateral": lateral, "heading": heading_error})
