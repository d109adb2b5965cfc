"""Energy-based artificial potential field planning for serial manipulators."""

from ._core import (
    ConfigError,
    FieldMode,
    FieldParams,
    RobotModel,
    Scenario,
    Scene,
    TrajectoryError,
    coriolis_matrix,
    eapf_attractive,
    forward_dynamics,
    forward_kinematics,
    gravity_vector,
    load_robot,
    load_scenario,
    mass_matrix,
    min_clearance,
    min_jerk_quintic,
    mu_schedule,
    optimize_knots,
    plan_path,
    point_jacobian,
    repulsive_kinetic_magnitude,
    repulsive_position_magnitude,
    run_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
