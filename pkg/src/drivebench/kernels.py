"""Hot numeric kernels: bicycle stepping, rectangle overlap, polyline queries,
path-following rollouts and collision forecasting.

Every kernel is written once as plain Python over scalars/ndarrays. By default
they are compiled with numba's nopython mode; set DRIVEBENCH_NUMBA=0 (or
install without numba) to run the identical uncompiled functions. fastmath is
deliberately left off so both paths produce the same IEEE results.
"""

import math
import os

import numpy as np

_env = os.environ.get("DRIVEBENCH_NUMBA", "1").strip().lower()
USE_NUMBA = _env not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:
        USE_NUMBA = False

if USE_NUMBA:
    def _jit(fn):
        return _njit(cache=True)(fn)
else:
    def _jit(fn):
        return fn


# vehicle parameter vector layout shared by all kernels:
# veh = (lf, lr, max_steer, accel_max, brake_decel, speed_max)
LF, LR, MAX_STEER, ACCEL_MAX, BRAKE_DECEL, SPEED_MAX = 0, 1, 2, 3, 4, 5


@_jit
def wrap_angle(a):
    # maps to (-pi, pi]; pi stays pi, -pi becomes pi
    return math.pi - (math.pi - a) % (2.0 * math.pi)


@_jit
def clamp(v, lo, hi):
    return min(max(v, lo), hi)


@_jit
def bicycle_step_scalar(x, y, yaw, v, steer, throttle, brake,
                        lf, lr, max_steer, accel_max, brake_decel, speed_max, dt):
    """One kinematic bicycle step. steer/throttle are clamped; brake is a
    0/1 flag that overrides throttle with a fixed deceleration.

    Positive steer command turns clockwise (to the right), so the wheel
    angle fed to the model is negated.
    """
    steer = clamp(steer, -1.0, 1.0)
    throttle = clamp(throttle, 0.0, 1.0)
    delta = -steer * max_steer
    beta = math.atan(lr / (lf + lr) * math.tan(delta))
    nx = x + v * math.cos(yaw + beta) * dt
    ny = y + v * math.sin(yaw + beta) * dt
    nyaw = wrap_angle(yaw + (v / lr) * math.sin(beta) * dt)
    if brake != 0.0:
        accel = -brake_decel
    else:
        accel = throttle * accel_max
    nv = clamp(v + accel * dt, 0.0, speed_max)
    return nx, ny, nyaw, nv


@_jit
def bicycle_unroll(x, y, yaw, v, cmds, veh, dt):
    """Roll the bicycle model through a (N,3) command array
    [steer, throttle, brake_flag]. Returns (N+1,4) states incl. the start."""
    n = cmds.shape[0]
    out = np.empty((n + 1, 4))
    out[0, 0] = x
    out[0, 1] = y
    out[0, 2] = yaw
    out[0, 3] = v
    for i in range(n):
        x, y, yaw, v = bicycle_step_scalar(
            x, y, yaw, v, cmds[i, 0], cmds[i, 1], cmds[i, 2],
            veh[LF], veh[LR], veh[MAX_STEER], veh[ACCEL_MAX],
            veh[BRAKE_DECEL], veh[SPEED_MAX], dt)
        out[i + 1, 0] = x
        out[i + 1, 1] = y
        out[i + 1, 2] = yaw
        out[i + 1, 3] = v
    return out


@_jit
def obb_overlap(ax, ay, ayaw, al, aw, bx, by, byaw, bl, bw):
    """Separating-axis test for two oriented rectangles (center, yaw,
    length, width). Touching edges count as overlap."""
    ca = math.cos(ayaw)
    sa = math.sin(ayaw)
    cb = math.cos(byaw)
    sb = math.sin(byaw)
    dx = bx - ax
    dy = by - ay
    hal = 0.5 * al
    haw = 0.5 * aw
    hbl = 0.5 * bl
    hbw = 0.5 * bw
    # candidate axes: both rectangles' local unit vectors
    for k in range(4):
        if k == 0:
            ux, uy = ca, sa
        elif k == 1:
            ux, uy = -sa, ca
        elif k == 2:
            ux, uy = cb, sb
        else:
            ux, uy = -sb, cb
        d = abs(dx * ux + dy * uy)
        ra = hal * abs(ca * ux + sa * uy) + haw * abs(-sa * ux + ca * uy)
        rb = hbl * abs(cb * ux + sb * uy) + hbw * abs(-sb * ux + cb * uy)
        if d > ra + rb:
            return False
    return True


@_jit
def obb_corners(cx, cy, yaw, length, width):
    c = math.cos(yaw)
    s = math.sin(yaw)
    hl = 0.5 * length
    hw = 0.5 * width
    out = np.empty((4, 2))
    out[0, 0] = cx + c * hl - s * hw
    out[0, 1] = cy + s * hl + c * hw
    out[1, 0] = cx + c * hl + s * hw
    out[1, 1] = cy + s * hl - c * hw
    out[2, 0] = cx - c * hl + s * hw
    out[2, 1] = cy - s * hl - c * hw
    out[3, 0] = cx - c * hl - s * hw
    out[3, 1] = cy - s * hl + c * hw
    return out


@_jit
def polys_overlap(pa, pb):
    """Separating-axis test for two convex polygons given as (N,2) vertex
    arrays (either winding). Touching counts as overlap."""
    for which in range(2):
        poly = pa if which == 0 else pb
        n = poly.shape[0]
        for i in range(n):
            x1 = poly[i, 0]
            y1 = poly[i, 1]
            j = i + 1
            if j == n:
                j = 0
            ex = poly[j, 0] - x1
            ey = poly[j, 1] - y1
            # edge normal
            nx_ = -ey
            ny_ = ex
            amin = 1e300
            amax = -1e300
            for k in range(pa.shape[0]):
                p = pa[k, 0] * nx_ + pa[k, 1] * ny_
                if p < amin:
                    amin = p
                if p > amax:
                    amax = p
            bmin = 1e300
            bmax = -1e300
            for k in range(pb.shape[0]):
                p = pb[k, 0] * nx_ + pb[k, 1] * ny_
                if p < bmin:
                    bmin = p
                if p > bmax:
                    bmax = p
            if amax < bmin or bmax < amin:
                return False
    return True


@_jit
def point_in_convex(poly, px, py):
    """Point inside (or on the boundary of) a convex polygon."""
    n = poly.shape[0]
    pos = False
    neg = False
    for i in range(n):
        j = i + 1
        if j == n:
            j = 0
        cross = ((poly[j, 0] - poly[i, 0]) * (py - poly[i, 1])
                 - (poly[j, 1] - poly[i, 1]) * (px - poly[i, 0]))
        if cross > 1e-12:
            pos = True
        elif cross < -1e-12:
            neg = True
        if pos and neg:
            return False
    return True


@_jit
def nearest_on_polyline(path, cum, px, py, i_lo, i_hi):
    """Nearest point on path segments [i_lo, i_hi) to (px,py).

    Returns (arc_s, signed_lateral, segment_index). Lateral is positive on
    the left of the local travel direction.
    """
    n = path.shape[0]
    if i_hi > n - 1:
        i_hi = n - 1
    if i_lo < 0:
        i_lo = 0
    best_d2 = 1e300
    best_s = cum[i_lo]
    best_lat = 0.0
    best_i = i_lo
    for i in range(i_lo, i_hi):
        x1 = path[i, 0]
        y1 = path[i, 1]
        dx = path[i + 1, 0] - x1
        dy = path[i + 1, 1] - y1
        l2 = dx * dx + dy * dy
        if l2 <= 0.0:
            continue
        t = ((px - x1) * dx + (py - y1) * dy) / l2
        t = clamp(t, 0.0, 1.0)
        qx = x1 + t * dx
        qy = y1 + t * dy
        ox = px - qx
        oy = py - qy
        d2 = ox * ox + oy * oy
        if d2 < best_d2:
            best_d2 = d2
            seg_len = math.sqrt(l2)
            best_s = cum[i] + t * seg_len
            cross = (dx * oy - dy * ox) / seg_len
            lat = math.sqrt(d2)
            if cross < 0.0:
                lat = -lat
            best_lat = lat
            best_i = i
    return best_s, best_lat, best_i


@_jit
def advance_cursor(path, cursor, px, py):
    """Greedy monotone cursor: move forward while the next vertex is closer."""
    n = path.shape[0]
    while cursor < n - 1:
        dx0 = path[cursor, 0] - px
        dy0 = path[cursor, 1] - py
        dx1 = path[cursor + 1, 0] - px
        dy1 = path[cursor + 1, 1] - py
        if dx1 * dx1 + dy1 * dy1 <= dx0 * dx0 + dy0 * dy0:
            cursor += 1
        else:
            break
    return cursor


@_jit
def first_index_at_distance(path, i_start, px, py, min_dist):
    """First vertex index >= i_start at Euclidean distance >= min_dist from
    (px,py); the last index if none qualifies."""
    n = path.shape[0]
    d2min = min_dist * min_dist
    for i in range(i_start, n):
        dx = path[i, 0] - px
        dy = path[i, 1] - py
        if dx * dx + dy * dy >= d2min:
            return i
    return n - 1


@_jit
def chord_resample(path, i_start, sx, sy, spacing, n_out):
    """Walk forward along a polyline taking steps of exactly `spacing`
    Euclidean meters starting from (sx,sy). Extends along the final segment
    direction if the polyline runs out. Returns (n_out, 2)."""
    n = path.shape[0]
    out = np.empty((n_out, 2))
    cx = sx
    cy = sy
    seg = i_start
    for k in range(n_out):
        placed = False
        while seg < n - 1:
            x1 = path[seg, 0]
            y1 = path[seg, 1]
            dx = path[seg + 1, 0] - x1
            dy = path[seg + 1, 1] - y1
            l2 = dx * dx + dy * dy
            if l2 <= 0.0:
                seg += 1
                continue
            # first intersection of the segment with the circle of radius
            # `spacing` centered on the current point, ahead of the current
            # projection
            fx = x1 - cx
            fy = y1 - cy
            a = l2
            b = 2.0 * (fx * dx + fy * dy)
            c = fx * fx + fy * fy - spacing * spacing
            disc = b * b - 4.0 * a * c
            if disc >= 0.0:
                root = (-b + math.sqrt(disc)) / (2.0 * a)
                t_lo = ((cx - x1) * dx + (cy - y1) * dy) / l2
                if root >= t_lo - 1e-12 and root <= 1.0 + 1e-12:
                    t = clamp(root, 0.0, 1.0)
                    cx = x1 + t * dx
                    cy = y1 + t * dy
                    placed = True
                    break
            seg += 1
        if not placed:
            # extrapolate straight along the last segment direction
            x1 = path[n - 2, 0]
            y1 = path[n - 2, 1]
            dx = path[n - 1, 0] - x1
            dy = path[n - 1, 1] - y1
            norm = math.sqrt(dx * dx + dy * dy)
            if norm <= 0.0:
                dx, dy, norm = 1.0, 0.0, 1.0
            cx = cx + spacing * dx / norm
            cy = cy + spacing * dy / norm
        out[k, 0] = cx
        out[k, 1] = cy
    return out


@_jit
def drive_path_command(x, y, yaw, v, path, cursor, dt,
                       target_speed, aim_min,
                       kp_lat, ki_lat, kd_lat, ilim_lat,
                       kp_lon, ki_lon, kd_lon, ilim_lon,
                       brake_margin, stop_eps,
                       lat_integ, lat_prev, lon_integ, lon_prev, has_prev):
    """One control decision for driving along `path` toward a fixed target
    speed.

    Steering: PID on the negated bearing to the first path vertex at least
    aim_min ahead. Throttle: PID on speed error; the brake flag fires when
    the target is (near) zero or the vehicle is clearly over speed.

    PID accumulators travel in and out so a caller can run live steps or
    roll out whole plans with identical arithmetic. Returns (steer, throttle,
    brake, cursor, lat_integ, lat_prev, lon_integ, lon_prev, has_prev).
    """
    cursor = advance_cursor(path, cursor, x, y)
    ai = first_index_at_distance(path, cursor, x, y, aim_min)
    bearing = wrap_angle(math.atan2(path[ai, 1] - y, path[ai, 0] - x) - yaw)
    err = -bearing
    if has_prev == 0.0:
        lat_prev = err
        has_prev = 1.0
    lat_integ = clamp(lat_integ + err * dt, -ilim_lat, ilim_lat)
    steer = kp_lat * err + ki_lat * lat_integ + kd_lat * (err - lat_prev) / dt
    lat_prev = err
    steer = clamp(steer, -1.0, 1.0)

    verr = target_speed - v
    lon_integ = clamp(lon_integ + verr * dt, -ilim_lon, ilim_lon)
    accel = kp_lon * verr + ki_lon * lon_integ + kd_lon * (verr - lon_prev) / dt
    lon_prev = verr
    brake = 0.0
    if target_speed < stop_eps and v > stop_eps:
        brake = 1.0
    elif v > target_speed + brake_margin:
        brake = 1.0
    throttle = clamp(accel, 0.0, 1.0)
    if brake != 0.0:
        throttle = 0.0
    return (steer, throttle, brake, cursor,
            lat_integ, lat_prev, lon_integ, lon_prev, has_prev)


@_jit
def drive_path_unroll(x, y, yaw, v, path, cursor, n_steps, dt,
                      target_speed, veh, aim_min,
                      kp_lat, ki_lat, kd_lat, ilim_lat,
                      kp_lon, ki_lon, kd_lon, ilim_lon,
                      brake_margin, stop_eps,
                      lat_integ, lat_prev, lon_integ, lon_prev, has_prev):
    """Roll drive_path_command + bicycle step n_steps forward. Returns
    (traj (n_steps+1,4), cursor, lat_integ, lat_prev, lon_integ, lon_prev,
    has_prev)."""
    traj = np.empty((n_steps + 1, 4))
    traj[0, 0] = x
    traj[0, 1] = y
    traj[0, 2] = yaw
    traj[0, 3] = v
    for i in range(n_steps):
        (steer, throttle, brake, cursor,
         lat_integ, lat_prev, lon_integ, lon_prev, has_prev) = drive_path_command(
            x, y, yaw, v, path, cursor, dt, target_speed, aim_min,
            kp_lat, ki_lat, kd_lat, ilim_lat,
            kp_lon, ki_lon, kd_lon, ilim_lon,
            brake_margin, stop_eps,
            lat_integ, lat_prev, lon_integ, lon_prev, has_prev)
        x, y, yaw, v = bicycle_step_scalar(
            x, y, yaw, v, steer, throttle, brake,
            veh[LF], veh[LR], veh[MAX_STEER], veh[ACCEL_MAX],
            veh[BRAKE_DECEL], veh[SPEED_MAX], dt)
        traj[i + 1, 0] = x
        traj[i + 1, 1] = y
        traj[i + 1, 2] = yaw
        traj[i + 1, 3] = v
    return traj, cursor, lat_integ, lat_prev, lon_integ, lon_prev, has_prev


@_jit
def follow_path_const_speed(x, y, yaw, v, path, cursor, n_steps, dt,
                            veh, kp_steer, aim_min):
    """Forecast rollout: proportional aim-point steering, speed held constant.
    Returns (traj (n_steps+1,4), cursor)."""
    traj = np.empty((n_steps + 1, 4))
    traj[0, 0] = x
    traj[0, 1] = y
    traj[0, 2] = yaw
    traj[0, 3] = v
    for i in range(n_steps):
        cursor = advance_cursor(path, cursor, x, y)
        ai = first_index_at_distance(path, cursor, x, y, aim_min)
        bearing = wrap_angle(math.atan2(path[ai, 1] - y, path[ai, 0] - x) - yaw)
        steer = clamp(-kp_steer * bearing, -1.0, 1.0)
        x, y, yaw, v = bicycle_step_scalar(
            x, y, yaw, v, steer, 0.0, 0.0,
            veh[LF], veh[LR], veh[MAX_STEER], veh[ACCEL_MAX],
            veh[BRAKE_DECEL], veh[SPEED_MAX], dt)
        traj[i + 1, 0] = x
        traj[i + 1, 1] = y
        traj[i + 1, 2] = yaw
        traj[i + 1, 3] = v
    return traj, cursor


@_jit
def forecast_first_collision(ex, ey, eyaw, ev, path, cursor,
                             ego_len, ego_wid, ego_veh, kp_steer, aim_min,
                             a_state, a_cmd, a_geom, a_veh,
                             n_steps, dt):
    """Joint constant-behavior rollout: the ego follows `path` at constant
    speed, every actor holds its current command. Rectangle overlap is
    checked after each step. a_state is (M,4), a_cmd (M,3), a_geom (M,2)
    length/width, a_veh (M,6).

    Returns (step, actor_index) of the earliest overlap, or (-1, -1).
    Assumes no overlap at step 0.
    """
    m = a_state.shape[0]
    st = a_state.copy()
    x, y, yaw, v = ex, ey, eyaw, ev
    for i in range(1, n_steps + 1):
        cursor = advance_cursor(path, cursor, x, y)
        ai = first_index_at_distance(path, cursor, x, y, aim_min)
        bearing = wrap_angle(math.atan2(path[ai, 1] - y, path[ai, 0] - x) - yaw)
        steer = clamp(-kp_steer * bearing, -1.0, 1.0)
        x, y, yaw, v = bicycle_step_scalar(
            x, y, yaw, v, steer, 0.0, 0.0,
            ego_veh[LF], ego_veh[LR], ego_veh[MAX_STEER], ego_veh[ACCEL_MAX],
            ego_veh[BRAKE_DECEL], ego_veh[SPEED_MAX], dt)
        for j in range(m):
            st[j, 0], st[j, 1], st[j, 2], st[j, 3] = bicycle_step_scalar(
                st[j, 0], st[j, 1], st[j, 2], st[j, 3],
                a_cmd[j, 0], a_cmd[j, 1], a_cmd[j, 2],
                a_veh[j, LF], a_veh[j, LR], a_veh[j, MAX_STEER],
                a_veh[j, ACCEL_MAX], a_veh[j, BRAKE_DECEL], a_veh[j, SPEED_MAX], dt)
            if obb_overlap(x, y, yaw, ego_len, ego_wid,
                           st[j, 0], st[j, 1], st[j, 2],
                           a_geom[j, 0], a_geom[j, 1]):
                return i, j
    return -1, -1


def prewarm():
    """Trigger compilation of every kernel on tiny inputs (no-op without
    numba). Keeps first-use latency out of timed sections."""
    path = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    cum = np.array([0.0, 1.0, 2.0])
    veh = np.array([1.3, 1.3, 1.22, 3.0, 6.0, 20.0])
    wrap_angle(0.1)
    bicycle_step_scalar(0.0, 0.0, 0.0, 1.0, 0.1, 0.5, 0.0,
                        1.3, 1.3, 1.22, 3.0, 6.0, 20.0, 0.05)
    bicycle_unroll(0.0, 0.0, 0.0, 1.0, np.zeros((2, 3)), veh, 0.05)
    obb_overlap(0.0, 0.0, 0.0, 4.5, 2.0, 1.0, 0.0, 0.1, 4.5, 2.0)
    obb_corners(0.0, 0.0, 0.0, 4.5, 2.0)
    polys_overlap(obb_corners(0.0, 0.0, 0.0, 1.0, 1.0),
                  obb_corners(0.5, 0.0, 0.0, 1.0, 1.0))
    point_in_convex(obb_corners(0.0, 0.0, 0.0, 1.0, 1.0), 0.0, 0.0)
    nearest_on_polyline(path, cum, 0.5, 0.2, 0, 2)
    advance_cursor(path, 0, 1.2, 0.0)
    first_index_at_distance(path, 0, 0.0, 0.0, 1.5)
    chord_resample(path, 0, 0.0, 0.0, 0.5, 3)
    drive_path_command(0.0, 0.0, 0.0, 1.0, path, 0, 0.05, 2.0, 3.5,
                       1.0, 0.0, 0.1, 10.0, 1.0, 0.05, 0.0, 10.0,
                       0.3, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0)
    drive_path_unroll(0.0, 0.0, 0.0, 1.0, path, 0, 2, 0.05, 2.0, veh, 3.5,
                      1.0, 0.0, 0.1, 10.0, 1.0, 0.05, 0.0, 10.0,
                      0.3, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0)
    follow_path_const_speed(0.0, 0.0, 0.0, 1.0, path, 0, 2, 0.05, veh, 1.0, 3.5)
    forecast_first_collision(0.0, 0.0, 0.0, 1.0, path, 0, 4.5, 2.0, veh, 1.0, 3.5,
                             np.array([[50.0, 0.0, 0.0, 0.0]]),
                             np.zeros((1, 3)), np.array([[4.5, 2.0]]),
                             veh.reshape(1, 6).copy(), 2, 0.05)
