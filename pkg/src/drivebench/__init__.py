"""Deterministic 2D driving simulation and control toolkit.

Closed-loop episodes on polyline routes with a kinematic bicycle model,
a privileged rule-based driver, plan-following controllers, behavioral
policy surrogates for ablation probes, route-based driving scores, an
unscented Kalman filter for GNSS smoothing, and a dataset pipeline.
"""

from .controllers import (ControllerConfig, PathPlan, SpeedDistribution,
                          StopSignBuffer, WaypointPlan,
                          confidence_weighted_speed, controller_preset,
                          path_speed_controller, waypoint_controller)
from .dynamics import (BicycleParams, ControlCommand, Pose2D, VehicleState,
                       step_bicycle, wrap_angle)
from .episode import AgentSpec, make_agent, run_episode, run_one, run_suite, score_log
from .expert import (ExpertConfig, ExpertRuntime, expert_act,
                     predict_collision, safety_box, stopping_distance,
                     target_speed_decision)
from .localization import (UkfParams, make_filter, predict, regenerate_gnss,
                           run_filter, tune_filter, update)
from .metrics import (EpisodeResult, InfractionEvent, aggregate,
                      detect_infractions, driving_score, infraction_score,
                      per_km_rate)
from .policies import apply_disturbance, make_policy
from .world import (LaneMap, Route, Scenario, build_route, load_scenario,
                    make_world, save_scenario, tick)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
