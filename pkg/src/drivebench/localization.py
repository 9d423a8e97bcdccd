"""Unscented Kalman filter over (x, y, yaw, speed) with position-only
measurements.

Sigma points follow the scaled (Van der Merwe) construction. The process
model is the same kinematic bicycle step the simulator integrates, driven by
the known control command; the measurement model picks out (x, y). Heading
is treated as a circular quantity: sigma-point recombination averages sines
and cosines, and covariance residuals are angle-wrapped.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as K
from .dynamics import BicycleParams

N_STATE = 4


@dataclass
class UkfParams:
    alpha: float = 0.1
    beta: float = 2.0
    kappa: float = 0.0
    # per-step process noise; the planar model is near exact so this stays small
    q_diag: tuple = (1e-4, 1e-4, 1e-6, 1e-4)
    r_diag: tuple = (0.5585 ** 2, 0.5585 ** 2)
    chol_jitter: float = 1e-9


@dataclass
class UkfState:
    mean: np.ndarray                  # (4,) x, y, yaw, speed
    cov: np.ndarray                   # (4,4)


def make_filter(x, y, yaw, speed, pos_var=1.0, yaw_var=0.05, speed_var=0.25):
    mean = np.array([x, y, yaw, speed], dtype=float)
    cov = np.diag([pos_var, pos_var, yaw_var, speed_var]).astype(float)
    return UkfState(mean, cov)


def _cholesky_jittered(a, jitter):
    """Lower Cholesky factor; on failure retries once with jitter*I added,
    then gives up."""
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        pass
    try:
        return np.linalg.cholesky(a + jitter * np.eye(a.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "sigma-point covariance not positive definite even after "
            f"jitter {jitter:g}") from exc


def sigma_weights(params, n=N_STATE):
    lam = params.alpha ** 2 * (n + params.kappa) - n
    wm = np.full(2 * n + 1, 1.0 / (2.0 * (n + lam)))
    wc = wm.copy()
    wm[0] = lam / (n + lam)
    wc[0] = lam / (n + lam) + (1.0 - params.alpha ** 2 + params.beta)
    return wm, wc, lam


def sigma_points(state, params):
    """(2n+1, 4) scaled sigma points; yaw entries wrapped."""
    n = N_STATE
    _, _, lam = sigma_weights(params, n)
    root = _cholesky_jittered((n + lam) * state.cov, params.chol_jitter)
    pts = np.empty((2 * n + 1, n))
    pts[0] = state.mean
    for i in range(n):
        col = root[:, i]
        pts[1 + i] = state.mean + col
        pts[1 + n + i] = state.mean - col
    pts[:, 2] = np.array([K.wrap_angle(a) for a in pts[:, 2]])
    return pts


def _mean_from_points(pts, wm):
    """Weighted mean with circular averaging of the yaw column."""
    mean = pts.T @ wm
    sin_sum = float(np.sin(pts[:, 2]) @ wm)
    cos_sum = float(np.cos(pts[:, 2]) @ wm)
    mean[2] = math.atan2(sin_sum, cos_sum)
    return mean


def _cov_from_points(pts, mean, wc, extra=None):
    diff = pts - mean
    diff[:, 2] = np.array([K.wrap_angle(a) for a in diff[:, 2]])
    cov = (diff.T * wc) @ diff
    if extra is not None:
        cov = cov + extra
    return 0.5 * (cov + cov.T)


def check_covariance(cov, tol=1e-9):
    """Raises when a covariance stops being symmetric PSD."""
    if not np.all(np.isfinite(cov)):
        raise ValueError("covariance has non-finite entries")
    if np.max(np.abs(cov - cov.T)) > tol:
        raise ValueError("covariance lost symmetry")
    eig = np.linalg.eigvalsh(0.5 * (cov + cov.T))
    if eig[0] < -tol:
        raise ValueError(f"covariance indefinite (min eig {eig[0]:g})")


def predict(state, cmd, params, bicycle=None, dt=0.05):
    """Propagate through the bicycle model under (steer, throttle, brake)."""
    if bicycle is None:
        bicycle = BicycleParams()
    steer, throttle, brake = float(cmd[0]), float(cmd[1]), float(cmd[2])
    wm, wc, _ = sigma_weights(params)
    pts = sigma_points(state, params)
    prop = np.empty_like(pts)
    for i, p in enumerate(pts):
        prop[i] = K.bicycle_step_scalar(
            p[0], p[1], p[2], p[3], steer, throttle, brake,
            bicycle.lf, bicycle.lr, bicycle.max_steer, bicycle.accel_max,
            bicycle.brake_decel, bicycle.speed_max, dt)
    mean = _mean_from_points(prop, wm)
    cov = _cov_from_points(prop, mean, wc, extra=np.diag(params.q_diag))
    return UkfState(mean, cov)


def update(state, gnss, params):
    """Fuse one (x, y) fix. Returns (new_state, innovation)."""
    wm, wc, _ = sigma_weights(params)
    pts = sigma_points(state, params)
    zpts = pts[:, :2]
    z_mean = zpts.T @ wm
    dz = zpts - z_mean
    s_mat = (dz.T * wc) @ dz + np.diag(params.r_diag)
    dx = pts - state.mean
    dx[:, 2] = np.array([K.wrap_angle(a) for a in dx[:, 2]])
    cross = (dx.T * wc) @ dz
    gain = cross @ np.linalg.inv(s_mat)
    innov = np.asarray(gnss, dtype=float) - z_mean
    mean = state.mean + gain @ innov
    mean[2] = K.wrap_angle(mean[2])
    cov = state.cov - gain @ s_mat @ gain.T
    cov = 0.5 * (cov + cov.T)
    return UkfState(mean, cov), innov


@dataclass
class FilterRun:
    means: np.ndarray          # (T,4)
    filtered_err: np.ndarray   # (T,) euclidean position error vs truth
    raw_err: np.ndarray        # (T,) gnss error vs truth
    mean_filtered: float = 0.0
    mean_raw: float = 0.0


def run_filter(records, params=None, bicycle=None, dt=0.05,
               init_from_truth=True):
    """Filter a recorded drive.

    records: list of dicts {t, cmd (3,), gnss (2,), truth (4,)}; cmd[i] is
    the command applied between samples i and i+1. The covariance is checked
    for symmetric positive semidefiniteness at every step.
    """
    if params is None:
        params = UkfParams()
    if bicycle is None:
        bicycle = BicycleParams()
    truth0 = records[0]["truth"]
    g0 = records[0]["gnss"]
    if init_from_truth:
        state = make_filter(g0[0], g0[1], truth0[2], truth0[3],
                            pos_var=params.r_diag[0])
    else:
        state = make_filter(g0[0], g0[1], 0.0, 0.0, pos_var=4.0, yaw_var=1.0,
                            speed_var=4.0)
    means = np.empty((len(records), N_STATE))
    f_err = np.empty(len(records))
    r_err = np.empty(len(records))
    means[0] = state.mean
    f_err[0] = math.hypot(state.mean[0] - truth0[0], state.mean[1] - truth0[1])
    r_err[0] = math.hypot(g0[0] - truth0[0], g0[1] - truth0[1])
    for i in range(1, len(records)):
        rec = records[i]
        state = predict(state, records[i - 1]["cmd"], params, bicycle, dt)
        check_covariance(state.cov)
        state, _ = update(state, rec["gnss"], params)
        check_covariance(state.cov)
        means[i] = state.mean
        tr = rec["truth"]
        f_err[i] = math.hypot(state.mean[0] - tr[0], state.mean[1] - tr[1])
        r_err[i] = math.hypot(rec["gnss"][0] - tr[0], rec["gnss"][1] - tr[1])
    return FilterRun(means, f_err, r_err,
                     float(np.mean(f_err)), float(np.mean(r_err)))


def regenerate_gnss(records, sigma, seed):
    """Fresh noise realization over the same truth trajectory."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    out = []
    for rec in records:
        tr = rec["truth"]
        noisy = (tr[0] + sigma * rng.standard_normal(),
                 tr[1] + sigma * rng.standard_normal())
        out.append({"t": rec["t"], "cmd": rec["cmd"], "gnss": noisy,
                    "truth": tr})
    return out


def tune_filter(records, q_scales=(0.01, 0.1, 1.0, 10.0),
                r_scales=(0.25, 0.5, 1.0, 2.0), base=None, dt=0.05):
    """Grid search over process/measurement noise scales; returns the
    (params, mean_error) pair with the lowest mean position error."""
    if base is None:
        base = UkfParams()
    best = (None, math.inf)
    for qs in q_scales:
        for rs in r_scales:
            cand = UkfParams(alpha=base.alpha, beta=base.beta,
                             kappa=base.kappa,
                             q_diag=tuple(q * qs for q in base.q_diag),
                             r_diag=tuple(r * rs for r in base.r_diag))
            run = run_filter(records, cand, dt=dt)
            if run.mean_filtered < best[1]:
                best = (cand, run.mean_filtered)
    return best


def write_fixture(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps({"t": rec["t"], "cmd": list(rec["cmd"]),
                                 "gnss": list(rec["gnss"]),
                                 "truth": list(rec["truth"])}) + "\n")


def read_fixture(path):
    out = []
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                out.append({"t": float(d["t"]),
                            "cmd": tuple(float(v) for v in d["cmd"]),
                            "gnss": tuple(float(v) for v in d["gnss"]),
                            "truth": tuple(float(v) for v in d["truth"])})
            except (KeyError, ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{ln}: bad fixture line: {exc}") from exc
    return out
