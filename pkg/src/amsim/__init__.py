"""Safety-constrained cascaded MPC simulation suite for a quadrotor-arm platform."""

from amsim.blf import BarrierParams
from amsim.config import (
    default_config,
    load_config,
    scenario_from_config,
    write_default_config,
)
from amsim.dynamics import AMParams, PlantInputs, PlantState, integrate
from amsim.errors import (
    AmsimError,
    ConfigError,
    DegenerateCenter,
    EmptyLog,
    InfeasibleGeometry,
    SchemaError,
    SingularAttitude,
)
from amsim.harness import (
    DisturbanceSpec,
    EpisodeLog,
    Metrics,
    Scenario,
    TrajectorySpec,
    case1_scenario,
    case2_scenario,
    compute_metrics,
    generate_trajectory,
    run_ablation,
    run_benchmark,
    run_episode,
)
from amsim.inner_loop import InnerGains, PidGains
from amsim.kinematics import WallPlane, WorkspaceSphere
from amsim.mpc import MpcConfig, solve_step

__all__ = [
    "AMParams",
    "AmsimError",
    "BarrierParams",
    "ConfigError",
    "DegenerateCenter",
    "DisturbanceSpec",
    "EmptyLog",
    "EpisodeLog",
    "InfeasibleGeometry",
    "InnerGains",
    "Metrics",
    "MpcConfig",
    "PidGains",
    "PlantInputs",
    "PlantState",
    "Scenario",
    "SchemaError",
    "SingularAttitude",
    "TrajectorySpec",
    "WallPlane",
    "WorkspaceSphere",
    "case1_scenario",
    "case2_scenario",
    "compute_metrics",
    "default_config",
    "generate_trajectory",
    "integrate",
    "load_config",
    "run_ablation",
    "run_benchmark",
    "run_episode",
    "scenario_from_config",
    "solve_step",
    "write_default_config",
]

__version__ = "0.1.0"
