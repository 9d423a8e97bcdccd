"""Episode scoring: infraction detection, infraction score, route
completion and driving score, plus aggregation across routes and seeds.

The driving score of an episode is route completion (percent) times the
infraction score, where the infraction score is the product of one penalty
factor per infraction. Route deviation, timeout and blocked are terminal:
they end the episode rather than multiply into the score, and nothing after
the terminal event counts.
"""

import math
from dataclasses import dataclass, field

import numpy as np

PENALTIES = {
    "collision_pedestrian": 0.50,
    "collision_vehicle": 0.60,
    "collision_static": 0.65,
    "red_light": 0.70,
    "stop_sign": 0.80,
}

TERMINAL_KINDS = ("route_deviation", "timeout", "blocked")

# aggregate report column order
REPORT_COLUMNS = ("DS", "RC", "IS", "Ped", "Veh", "Stat", "Red", "Stop",
                  "Dev", "TO", "Block")

_RATE_KEYS = {
    "Ped": "collision_pedestrian", "Veh": "collision_vehicle",
    "Stat": "collision_static", "Red": "red_light", "Stop": "stop_sign",
    "Dev": "route_deviation", "TO": "timeout", "Block": "blocked",
}

DEVIATION_LIMIT = 30.0     # meters off the route ends the episode
BLOCKED_SPEED = 0.1        # m/s
BLOCKED_TIME = 90.0        # seconds below BLOCKED_SPEED


@dataclass
class InfractionEvent:
    kind: str
    time: float
    data: dict = field(default_factory=dict)


@dataclass
class EpisodeResult:
    route: str
    seed: int
    eval_index: int
    rc: float                 # route completion, percent
    is_: float                # infraction score in [0, 1]
    ds: float                 # rc * is_
    km: float                 # odometer distance driven
    events: list = field(default_factory=list)
    completed: bool = False
    duration: float = 0.0

    def count(self, kind):
        return sum(1 for e in self.events if e.kind == kind)


def infraction_score(events, penalties=None):
    """Product of penalty factors over non-terminal infractions."""
    if penalties is None:
        penalties = PENALTIES
    score = 1.0
    for e in events:
        kind = e.kind if isinstance(e, InfractionEvent) else e
        if kind in penalties:
            score *= penalties[kind]
    return score


def driving_score(rc, is_):
    return rc * is_


def _collision_kind(actor_kind):
    if actor_kind == "pedestrian":
        return "collision_pedestrian"
    if actor_kind in ("vehicle", "cyclist"):
        return "collision_vehicle"
    return "collision_static"


def detect_infractions(raw_events, history, scenario, time_budget,
                       lane_width=None):
    """Classify a tick history + raw event stream into infractions.

    history is an (T,7) array of rows (t, x, y, yaw, speed, route_s,
    lateral). Deterministic: replaying a stored history reproduces the same
    events. Returns (events, terminal_event_or_None).
    """
    if lane_width is None:
        lane_width = scenario.lane_map.lane_width
    events = []
    for ev in raw_events:
        if ev.kind == "collision":
            events.append(InfractionEvent(_collision_kind(ev.data["actor_kind"]),
                                          ev.time, dict(ev.data)))
        elif ev.kind == "stop_zone_exit" and ev.data["min_speed"] >= BLOCKED_SPEED:
            events.append(InfractionEvent("stop_sign", ev.time, dict(ev.data)))
        elif ev.kind == "stop_line_crossed" and ev.data["phase"] == "red":
            events.append(InfractionEvent("red_light", ev.time, dict(ev.data)))

    # static hazards: leaving the drivable corridor inside a flagged zone
    corridor = lane_width / 2.0 + 1.0
    outside = False
    for row in history:
        t, s, lat = row[0], row[5], row[6]
        in_zone = any(z0 <= s <= z1 for z0, z1 in scenario.static_zones)
        if in_zone and abs(lat) > corridor:
            if not outside:
                events.append(InfractionEvent("collision_static", t,
                                              {"lateral": lat}))
                outside = True
        else:
            outside = False

    terminal = None
    # route deviation
    dev = np.flatnonzero(np.abs(history[:, 6]) > DEVIATION_LIMIT)
    if len(dev):
        terminal = InfractionEvent("route_deviation", float(history[dev[0], 0]))
    # blocked: continuously below crawl speed for the blocked window
    slow = history[:, 4] < BLOCKED_SPEED
    run_start = None
    for i in range(len(history)):
        if slow[i]:
            if run_start is None:
                run_start = history[i, 0]
            elif history[i, 0] - run_start >= BLOCKED_TIME:
                cand = InfractionEvent("blocked", float(history[i, 0]))
                if terminal is None or cand.time < terminal.time:
                    terminal = cand
                break
        else:
            run_start = None
    # timeout
    if history[-1, 0] >= time_budget and (terminal is None
                                          or time_budget < terminal.time):
        terminal = InfractionEvent("timeout", float(time_budget))

    if terminal is not None:
        events = [e for e in events if e.time <= terminal.time]
    events.sort(key=lambda e: e.time)
    return events, terminal


def score_history(route_name, seed, eval_index, raw_events, history,
                  scenario, time_budget, completed, penalties=None):
    """Build the episode scorecard from a stored run."""
    events, terminal = detect_infractions(raw_events, history, scenario,
                                          time_budget)
    if terminal is not None:
        cut = history[:, 0] <= terminal.time
        history = history[cut] if np.any(cut) else history[:1]
        completed = False
    s_end = float(history[-1, 5])
    frac = 1.0 if completed else min(s_end / scenario.route.length, 1.0)
    rc = 100.0 if completed else 100.0 * frac
    is_ = infraction_score(events, penalties)
    dt_steps = np.diff(history[:, 0])
    km = float(np.sum(history[:-1, 4] * dt_steps)) / 1000.0 if len(history) > 1 else 0.0
    all_events = list(events) + ([terminal] if terminal else [])
    return EpisodeResult(route=route_name, seed=seed, eval_index=eval_index,
                         rc=rc, is_=is_, ds=driving_score(rc, is_), km=km,
                         events=all_events, completed=completed,
                         duration=float(history[-1, 0]))


def per_km_rate(results, kind):
    total_km = sum(r.km for r in results)
    if total_km <= 0.0:
        return 0.0
    return sum(r.count(kind) for r in results) / total_km


def aggregate(results):
    """Mean metrics over all episodes; std of DS/RC/IS over per-seed means.
    Returns a plain dict in report column order."""
    if not results:
        raise ValueError("no episode results to aggregate")
    by_seed = {}
    for r in results:
        by_seed.setdefault(r.seed, []).append(r)

    def seed_means(attr):
        return [float(np.mean([getattr(r, attr) for r in rs]))
                for _, rs in sorted(by_seed.items())]

    out = {
        "DS": float(np.mean([r.ds for r in results])),
        "RC": float(np.mean([r.rc for r in results])),
        "IS": float(np.mean([r.is_ for r in results])),
    }
    for col, kind in _RATE_KEYS.items():
        out[col] = per_km_rate(results, kind)
    stds = {}
    for col, attr in (("DS", "ds"), ("RC", "rc"), ("IS", "is_")):
        means = seed_means(attr)
        stds[col] = float(np.std(means, ddof=1)) if len(means) > 1 else 0.0
    out["std"] = stds
    out["episodes"] = len(results)
    out["seeds"] = sorted(by_seed)
    out["total_km"] = sum(r.km for r in results)
    return out


def per_seed_rates(results, kind):
    """Per-km rate of one infraction kind computed separately per seed.
    Returns {seed: rate} for paired comparisons across configurations."""
    by_seed = {}
    for r in results:
        by_seed.setdefault(r.seed, []).append(r)
    return {seed: per_km_rate(rs, kind) for seed, rs in sorted(by_seed.items())}
