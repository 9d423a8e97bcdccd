"""Dataset extraction from expert episodes.

Episodes are recorded at the simulation rate and downsampled by keeping
every fifth frame. Each kept frame carries its supervision targets: the
realized future poses at 250 ms spacing expressed in the frame's ego
coordinates (waypoint labels), the route ahead resampled at exactly 1 m
chords (path labels), the next target point, and the commanded speed class.
Every frame also gets an augmented twin: the same labels re-expressed in a
virtual camera frame shifted laterally and rotated by small random amounts.
Only episodes with a perfect driving score are kept. Files are JSON lines
with a schema header; floats survive the round trip bit for bit.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .dynamics import Pose2D, points_to_local
from .world import next_target_point

SCHEMA_VERSION = 1
RECORD_HZ = 20
KEEP_EVERY = 5              # 20 Hz recording kept at 4 FPS
WAYPOINT_STRIDE = 5         # ticks between waypoint labels = 250 ms
WAYPOINT_COUNT = 8
PATH_COUNT = 10
PATH_SPACING = 1.0


@dataclass
class FrameRecord:
    episode: str
    frame: int                  # tick index in the source episode
    time: float
    ego: tuple                  # (x, y, yaw, speed) world frame
    waypoints: np.ndarray       # (8,2) ego frame, realized future
    path: np.ndarray            # (10,2) ego frame, 1 m chords
    target_point: tuple         # (x, y) ego frame
    speed_class: int
    target_speed: float
    aug: dict = None            # {"shift":…, "rot":…} when augmented


@dataclass
class AugmentationConfig:
    shift_range: float = 1.0                  # lateral, uniform +-
    rot_range: float = math.radians(5.0)      # uniform +-
    select_p: float = 0.5


def frame_labels(history, infos, route, idx):
    """Labels for tick idx of a recorded episode."""
    row = history[idx]
    pose = Pose2D(row[1], row[2], row[3])
    future_idx = [min(idx + WAYPOINT_STRIDE * (k + 1), len(history) - 1)
                  for k in range(WAYPOINT_COUNT)]
    wp_world = history[future_idx][:, 1:3]
    waypoints = points_to_local(pose, wp_world)
    path_world = K.chord_resample(route.path, 0, pose.x, pose.y,
                                  PATH_SPACING, PATH_COUNT)
    path = points_to_local(pose, path_world)
    tp, _ = next_target_point(route, float(row[5]))
    tp_local = points_to_local(pose, tp.reshape(1, 2))[0]
    decision = infos[min(idx, len(infos) - 1)]["decision"]
    return waypoints, path, tp_local, decision


def record_episode(log, route, name=None):
    """FrameRecords for every kept frame of an expert episode log."""
    frames = []
    name = name or log.scenario_name
    history = log.history
    for idx in range(0, len(history) - 1, KEEP_EVERY):
        waypoints, path, tp_local, decision = frame_labels(
            history, log.infos, route, idx)
        row = history[idx]
        frames.append(FrameRecord(
            episode=name, frame=idx, time=float(row[0]),
            ego=(float(row[1]), float(row[2]), float(row[3]), float(row[4])),
            waypoints=waypoints, path=path,
            target_point=(float(tp_local[0]), float(tp_local[1])),
            speed_class=decision.speed_class,
            target_speed=decision.target_speed))
    return frames


def _reframe(points, shift, rot):
    """Re-express ego-frame points in a frame moved laterally by `shift` and
    rotated by `rot`."""
    pts = np.asarray(points, dtype=float)
    c, s = math.cos(rot), math.sin(rot)
    dx = pts[:, 0]
    dy = pts[:, 1] - shift
    return np.column_stack((c * dx + s * dy, -s * dx + c * dy))


def augment_frame(rec, rng, cfg=None):
    """Augmented twin of a frame: all geometric labels re-expressed in a
    randomly shifted/rotated virtual sensor frame."""
    if cfg is None:
        cfg = AugmentationConfig()
    shift = float(rng.uniform(-cfg.shift_range, cfg.shift_range))
    rot = float(rng.uniform(-cfg.rot_range, cfg.rot_range))
    tp = _reframe(np.asarray(rec.target_point).reshape(1, 2), shift, rot)[0]
    return FrameRecord(
        episode=rec.episode, frame=rec.frame, time=rec.time, ego=rec.ego,
        waypoints=_reframe(rec.waypoints, shift, rot),
        path=_reframe(rec.path, shift, rot),
        target_point=(float(tp[0]), float(tp[1])),
        speed_class=rec.speed_class, target_speed=rec.target_speed,
        aug={"shift": shift, "rot": rot})


def undo_augmentation(points, aug):
    """Inverse of the augmentation reframe."""
    pts = np.asarray(points, dtype=float)
    c, s = math.cos(aug["rot"]), math.sin(aug["rot"])
    x = c * pts[:, 0] - s * pts[:, 1]
    y = s * pts[:, 0] + c * pts[:, 1] + aug["shift"]
    return np.column_stack((x, y))


def select_frame(clean, augmented, rng, p=0.5):
    """Training-time choice between a frame and its augmented twin."""
    return augmented if rng.random() < p else clean


def filter_perfect(results):
    """Names of episodes that completed with a perfect driving score."""
    return {r.route for r in results if r.completed and r.is_ == 1.0
            and r.rc == 100.0}


def shard_subsample(frames, factor, offset):
    """Every `factor`-th frame starting at `offset`; the shards for
    offset = 0..factor-1 partition the input."""
    if not 0 <= offset < factor:
        raise ValueError("offset must be in [0, factor)")
    return frames[offset::factor]


def _rec_to_dict(rec):
    d = {"episode": rec.episode, "frame": rec.frame, "time": rec.time,
         "ego": list(rec.ego), "waypoints": rec.waypoints.tolist(),
         "path": rec.path.tolist(), "target_point": list(rec.target_point),
         "speed_class": rec.speed_class, "target_speed": rec.target_speed}
    if rec.aug is not None:
        d["aug"] = rec.aug
    return d


def _rec_from_dict(d):
    return FrameRecord(
        episode=d["episode"], frame=int(d["frame"]), time=float(d["time"]),
        ego=tuple(float(v) for v in d["ego"]),
        waypoints=np.array(d["waypoints"], dtype=float),
        path=np.array(d["path"], dtype=float),
        target_point=tuple(float(v) for v in d["target_point"]),
        speed_class=int(d["speed_class"]),
        target_speed=float(d["target_speed"]),
        aug=d.get("aug"))


def write_dataset(frames, path):
    with open(path, "w") as fh:
        fh.write(json.dumps({"schema": SCHEMA_VERSION}) + "\n")
        for rec in frames:
            fh.write(json.dumps(_rec_to_dict(rec)) + "\n")


def read_dataset(path):
    frames = []
    with open(path) as fh:
        header = fh.readline()
        try:
            schema = json.loads(header).get("schema")
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:1: missing schema header") from exc
        if schema != SCHEMA_VERSION:
            raise ValueError(f"{path}:1: unsupported schema {schema!r}")
        for ln, line in enumerate(fh, 2):
            line = line.strip()
            if not line:
                continue
            try:
                frames.append(_rec_from_dict(json.loads(line)))
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{ln}: bad record: {exc}") from exc
    return frames
