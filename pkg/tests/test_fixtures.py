"""Scenario suites: sizes, determinism, and shared layout invariants."""
import numpy as np
import pytest

from drivebench.fixtures import (CORNER_LEG_IN, SUITES, benchmark_suite,
                                 corner_scenario,
                                 disturbance_suite, forecast_cases,
                                 occlusion_suite, suite, ukf_fixture_records,
                                 uncertainty_suite)
from drivebench.world import scenario_to_dict


def test_suite_registry():
    assert set(SUITES) == {"benchmark", "disturbance", "occlusion",
                           "uncertainty", "corner"}
    with pytest.raises(ValueError):
        suite("warmup")


def test_suite_sizes():
    assert len(benchmark_suite()) == 20
    assert len(disturbance_suite()) == 10
    assert len(occlusion_suite()) == 3
    assert len(uncertainty_suite()) == 8
    assert len(suite("corner")) == 2


def test_scenario_names_unique():
    for name in SUITES:
        names = [sc.name for sc in suite(name)]
        assert len(names) == len(set(names)), name


def test_suites_build_deterministically():
    for name in SUITES:
        a = [scenario_to_dict(sc) for sc in suite(name)]
        b = [scenario_to_dict(sc) for sc in suite(name)]
        assert a == b, name


def test_disturbance_suite_carries_one_teleport_each():
    for sc in disturbance_suite():
        assert len(sc.disturbances) == 1
        s, lat, hd = sc.disturbances[0]
        assert abs(lat) == 3.0
        assert 0.0 < s < sc.route.length


def test_corner_scenarios_differ_only_in_target_points():
    far = corner_scenario(tp_far=True)
    near = corner_scenario(tp_far=False)
    np.testing.assert_allclose(far.route.path, near.route.path)
    assert list(far.route.tp_s) != list(near.route.tp_s)
    # the pre-corner variant places a target point before the bend
    assert np.any(near.route.tp_s <= CORNER_LEG_IN)
    assert np.all(far.route.tp_s > CORNER_LEG_IN)


def test_occlusion_routes_have_signs():
    for sc in occlusion_suite():
        assert len(sc.signs) >= 1
        for sign in sc.signs:
            assert 0.0 < sign.s < sc.route.length


def test_uncertainty_routes_have_windows():
    for sc in uncertainty_suite():
        assert sc.ambiguity_windows
        for win in sc.ambiguity_windows:
            assert win.s_start < win.s_end
            assert 0.0 < win.w_max <= 1.0
            assert abs(sum(win.alt) - 1.0) < 1e-12


def test_forecast_cases_size_and_balance():
    cases = forecast_cases()
    assert len(cases) == 50
    names = [c["name"] for c in cases]
    assert len(set(names)) == 50
    hits = sum(c["expect"] == "hit" for c in cases)
    assert 20 <= hits <= 30


def test_ukf_fixture_records_deterministic():
    a = ukf_fixture_records(duration=5.0)
    b = ukf_fixture_records(duration=5.0)
    assert len(a) == len(b) == int(5.0 / 0.05) + 1
    for ra, rb in zip(a, b):
        assert ra["t"] == rb["t"] and ra["gnss"] == rb["gnss"]
        assert ra["truth"] == rb["truth"] and ra["cmd"] == rb["cmd"]
