"""Python bindings for the armtraj planner core."""

from ._core import (  # noqa: F401
    ParameterError,
    RobotParams,
    ScenarioError,
    acceleration_cost,
    default_params,
    effective_stall,
    forward_kinematics,
    gdth_run,
    gravity_gradient,
    inverse_dynamics,
    load_config,
    mass_matrix,
    parse_config,
    payload_capacity,
    run_scenario,
    solve_boundary,
    u_phi0,
    u_phi0_closed_form,
)
