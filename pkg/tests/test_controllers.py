"""Waypoint and path+speed controllers, PID, and the stop-sign memory."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from drivebench.controllers import (CLASS_SPEEDS_MS, ControllerConfig,
                                    ControllerState, PathPlan, PIDGains,
                                    PIDState, SpeedDistribution, WaypointPlan,
                                    confidence_weighted_speed,
                                    controller_preset, longitudinal_command,
                                    path_speed_controller, pid_step,
                                    plan_target_speed, stop_sign_buffer_step,
                                    waypoint_controller, StopSignBuffer)


def _straight_waypoints(speed):
    return WaypointPlan([[0.25 * speed * (i + 1), 0.0] for i in range(8)])


def _straight_path():
    return PathPlan([[float(i + 1), 0.0] for i in range(10)])


def _square(cx, cy, half=1.0):
    return np.array([[cx - half, cy - half], [cx + half, cy - half],
                     [cx + half, cy + half], [cx - half, cy + half]])


def test_plan_shape_validation():
    with pytest.raises(ValueError):
        WaypointPlan(np.zeros((7, 2)))
    with pytest.raises(ValueError):
        PathPlan(np.zeros((8, 2)))
    with pytest.raises(ValueError):
        SpeedDistribution([0.5, 0.5, 0.5, -0.5])
    with pytest.raises(ValueError):
        SpeedDistribution([0.5, 0.5, 0.5, 0.5])
    assert SpeedDistribution.one_hot(2).probs[2] == 1.0


def test_pid_step_hand_values():
    gains = PIDGains(1.0, 0.5, 0.2, integral_limit=10.0)
    state = PIDState()
    # first sample: integral 0.2, no derivative kick
    assert pid_step(state, gains, 2.0, 0.1) == pytest.approx(2.0 + 0.5 * 0.2)
    # second: integral 0.5, derivative (3-2)/0.1
    assert pid_step(state, gains, 3.0, 0.1) == pytest.approx(
        3.0 + 0.5 * 0.5 + 0.2 * 10.0)


def test_pid_integral_clamps():
    gains = PIDGains(0.0, 1.0, 0.0, integral_limit=1.5)
    state = PIDState()
    for _ in range(100):
        out = pid_step(state, gains, 5.0, 0.1)
    assert out == pytest.approx(1.5)
    assert state.integral == 1.5


def test_plan_target_speed_reads_geometry():
    # points half and one second out sit 3 m apart at 6 m/s
    assert plan_target_speed(_straight_waypoints(6.0)) == pytest.approx(6.0)
    assert plan_target_speed(_straight_waypoints(0.0)) == 0.0


def test_class_speeds_come_from_kmh_labels():
    np.testing.assert_allclose(CLASS_SPEEDS_MS,
                               (29 / 3.6, 5.0, 7 / 3.6, 0.0))


def test_confidence_weighted_hand_value():
    cfg = ControllerConfig()
    dist = SpeedDistribution([0.6, 0.2, 0.1, 0.1])
    target, brake = confidence_weighted_speed(dist, cfg)
    # (0.6*29/3.6 + 0.2*5 + 0.1*7/3.6) / 0.9 - 2
    assert target == pytest.approx(4.697530864197532, abs=1e-12)
    assert not brake


def test_confidence_argmax_hand_value():
    cfg = ControllerConfig(argmax=True)
    target, brake = confidence_weighted_speed(
        SpeedDistribution([0.6, 0.2, 0.1, 0.1]), cfg)
    assert target == pytest.approx(29 / 3.6 - 2.0, abs=1e-12)
    assert not brake
    # the most likely class being the stop class brakes regardless of
    # the threshold
    target, brake = confidence_weighted_speed(
        SpeedDistribution([0.1, 0.2, 0.2, 0.5]), ControllerConfig(
            argmax=True, brake_threshold=0.6))
    assert (target, brake) == (0.0, True)


def test_confidence_brake_threshold_boundary():
    dist = SpeedDistribution([0.1, 0.2, 0.2, 0.5])
    assert confidence_weighted_speed(dist, ControllerConfig())[1]
    near = SpeedDistribution([0.11, 0.2, 0.2, 0.49])
    assert not confidence_weighted_speed(near, ControllerConfig())[1]


def test_confidence_offset_floors_at_zero():
    # caution class one-hot: 7/3.6 < 2 m/s offset
    target, brake = confidence_weighted_speed(SpeedDistribution.one_hot(2),
                                              ControllerConfig())
    assert (target, brake) == (0.0, False)


def test_confidence_all_stop_mass_without_threshold():
    # threshold above 1 disables the early brake; the weighted branch still
    # stops when no moving mass remains
    cfg = ControllerConfig(brake_threshold=1.1)
    assert confidence_weighted_speed(SpeedDistribution.one_hot(3), cfg) \
        == (0.0, True)


@given(st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4)
       .filter(lambda p: sum(p) > 1e-6))
def test_confidence_weighted_bounds(raw):
    p = np.asarray(raw) / sum(raw)
    target, brake = confidence_weighted_speed(SpeedDistribution(p),
                                              ControllerConfig())
    assert 0.0 <= target <= 29 / 3.6 - 2.0 + 1e-9
    if brake:
        assert target == 0.0


def test_waypoint_controller_tracks_straight_plan():
    cfg = ControllerConfig()
    cmd, target = waypoint_controller(_straight_waypoints(6.0), 4.0, cfg,
                                      ControllerState())
    assert target == pytest.approx(6.0)
    assert cmd.steer == pytest.approx(0.0, abs=1e-12)
    assert cmd.throttle > 0.0 and not cmd.brake
    # overspeed beyond the margin brakes
    cmd, _ = waypoint_controller(_straight_waypoints(6.0), 7.0, cfg,
                                 ControllerState())
    assert cmd.brake and cmd.throttle == 0.0


def test_waypoint_controller_collapsed_plan_stops():
    cmd, target = waypoint_controller(WaypointPlan(np.zeros((8, 2))), 5.0,
                                      ControllerConfig(), ControllerState())
    assert target == 0.0
    assert cmd.brake and cmd.throttle == 0.0
    # already at rest: no brake flag needed
    cmd, _ = waypoint_controller(WaypointPlan(np.zeros((8, 2))), 0.0,
                                 ControllerConfig(), ControllerState())
    assert not cmd.brake


def test_waypoint_controller_steers_toward_offset_plan():
    left = WaypointPlan([[0.5 * (i + 1), 0.3 * (i + 1)] for i in range(8)])
    cmd, _ = waypoint_controller(left, 3.0, ControllerConfig(),
                                 ControllerState())
    assert cmd.steer < 0.0          # negative steer turns left
    right = WaypointPlan([[0.5 * (i + 1), -0.3 * (i + 1)] for i in range(8)])
    cmd, _ = waypoint_controller(right, 3.0, ControllerConfig(),
                                 ControllerState())
    assert cmd.steer > 0.0


def test_longitudinal_near_standstill_coasts():
    out = longitudinal_command(0.05, 0.0, ControllerConfig(), ControllerState(),
                               0.05)
    assert out == (0.0, False)


def test_stop_sign_buffer_lifecycle():
    buf = StopSignBuffer()
    ahead = _square(6.0, 0.0)
    # sign seen once, well ahead: remembered but not yet forcing
    assert not stop_sign_buffer_step(buf, [(0, ahead)], (0.0, 0.0, 0.0), 8.0)
    assert buf.sign_id == 0 and buf.corners is not None
    # detections drop out; dead-reckon forward 0.4 m per tick
    forced_at = None
    for k in range(12):
        forced = stop_sign_buffer_step(buf, [], (0.4, 0.0, 0.0), 8.0)
        if forced and forced_at is None:
            forced_at = k
    assert forced_at is not None            # ego reached the buffered sign
    # halting on the sign serves it and releases the brake latch
    assert not stop_sign_buffer_step(buf, [], (0.0, 0.0, 0.0), 0.05)
    assert buf.served
    assert not stop_sign_buffer_step(buf, [], (0.4, 0.0, 0.0), 8.0)
    # far behind, the memory clears
    for _ in range(40):
        stop_sign_buffer_step(buf, [], (0.4, 0.0, 0.0), 8.0)
    assert buf.corners is None and buf.sign_id == -1


def test_stop_sign_buffer_new_id_resets_served():
    buf = StopSignBuffer()
    stop_sign_buffer_step(buf, [(0, _square(0.0, 0.0))], (0.0, 0.0, 0.0), 0.05)
    assert buf.served
    stop_sign_buffer_step(buf, [(1, _square(6.0, 0.0))], (0.0, 0.0, 0.0), 8.0)
    assert buf.sign_id == 1 and not buf.served


def test_stop_sign_buffer_rotates_with_ego():
    buf = StopSignBuffer()
    stop_sign_buffer_step(buf, [(0, _square(2.0, 0.0))], (0.0, 0.0, 0.0), 8.0)
    # quarter turn left: what was dead ahead is now off the right side
    stop_sign_buffer_step(buf, [], (0.0, 0.0, np.pi / 2), 8.0)
    np.testing.assert_allclose(buf.corners.mean(axis=0), [0.0, -2.0],
                               atol=1e-12)


def test_path_speed_controller_straight():
    cfg = ControllerConfig()
    cmd, target = path_speed_controller(_straight_path(),
                                        SpeedDistribution.one_hot(0), 5.0,
                                        cfg, ControllerState())
    assert target == pytest.approx(29 / 3.6 - 2.0)
    assert cmd.steer == pytest.approx(0.0, abs=1e-12)
    assert cmd.throttle > 0.0 and not cmd.brake


def test_path_speed_controller_brakes_on_stop_mass():
    dist = SpeedDistribution([0.1, 0.1, 0.2, 0.6])
    cmd, target = path_speed_controller(_straight_path(), dist, 5.0,
                                        ControllerConfig(), ControllerState())
    assert target == 0.0
    assert cmd.brake and cmd.throttle == 0.0


def test_path_speed_controller_with_sign_memory():
    cfg = ControllerConfig(stop_buffer=True)
    state = ControllerState()
    dist = SpeedDistribution.one_hot(0)     # speed head sees open road
    cmd, target = path_speed_controller(
        _straight_path(), dist, 8.0, cfg, state,
        detections=[(0, _square(0.0, 0.0))])
    assert target == 0.0 and cmd.brake      # memory overrides the speed head
    # serving the sign hands control back to the distribution
    path_speed_controller(_straight_path(), dist, 0.05, cfg, state)
    cmd, target = path_speed_controller(_straight_path(), dist, 5.0, cfg,
                                        state)
    assert target == pytest.approx(29 / 3.6 - 2.0)
    assert not cmd.brake


def test_controller_presets():
    assert controller_preset("validation").brake_threshold == 0.50
    assert controller_preset("dense").brake_threshold == 0.33
    with pytest.raises(ValueError):
        controller_preset("sparse")
