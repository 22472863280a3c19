"""Structured config files mapping onto the scenario and solver objects.

One YAML document drives everything: platform constants, planner weights
and bounds, inner-loop gains, and the scenario wrapper.  `default_config`
returns the packaged defaults, `load_config` merges a user file over
them, and `scenario_from_config` builds the runnable Scenario.  Unknown
keys anywhere are rejected so a typo cannot silently fall back to a
default.
"""

from importlib import resources

import numpy as np
import yaml

from amsim.blf import BarrierParams
from amsim.dynamics import AMParams
from amsim.errors import ConfigError
from amsim.harness import (
    DisturbanceSpec,
    Scenario,
    TrajectorySpec,
    boxing_walls,
)
from amsim.inner_loop import InnerGains, PidGains
from amsim.kinematics import WorkspaceSphere
from amsim.mpc import MpcConfig
from amsim.sqp import SqpOptions

__all__ = [
    "default_config",
    "default_config_text",
    "load_config",
    "scenario_from_config",
    "write_default_config",
]


def default_config_text() -> str:
    return resources.files("amsim").joinpath("data/defaults.yaml").read_text()


def default_config() -> dict:
    return yaml.safe_load(default_config_text())


def write_default_config(path) -> None:
    with open(path, "w") as fh:
        fh.write(default_config_text())


def _merge(base: dict, user, path: str) -> dict:
    if not isinstance(user, dict):
        raise ConfigError(f"section {path or 'top level'} must be a mapping")
    out = dict(base)
    for key, val in user.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path}{key}")
        if isinstance(base[key], dict):
            out[key] = _merge(base[key], val, f"{path}{key}.")
        else:
            out[key] = val
    return out


def load_config(path=None) -> dict:
    """Defaults merged with an optional user YAML file."""
    cfg = default_config()
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    if user is None:
        return cfg
    return _merge(cfg, user, "")


def _trajectory(sec: dict) -> TrajectorySpec:
    end = sec["end"]
    return TrajectorySpec(
        kind=sec["kind"],
        center=np.asarray(sec["center"], float),
        radius=float(sec["radius"]),
        period=float(sec["period"]),
        climb=float(sec["climb"]),
        end=None if end is None else np.asarray(end, float),
        amplitude=np.asarray(sec["amplitude"], float),
        harmonics=tuple(int(h) for h in sec["harmonics"]),
    )


def _disturbance(sec: dict) -> DisturbanceSpec:
    kind = sec["kind"]
    if kind == "none":
        return DisturbanceSpec()
    if kind == "uniform":
        return DisturbanceSpec.uniform(float(sec["d_m"]), seed=int(sec["seed"]))
    raise ConfigError(f"unknown disturbance kind {kind!r}")


def _params(sec: dict) -> AMParams:
    return AMParams(
        m_am=float(sec["m_am"]),
        I_B=np.diag(np.asarray(sec["I_B"], float)),
        m_links=np.asarray(sec["m_links"], float),
        l_links=np.asarray(sec["l_links"], float),
        I_links=np.asarray(sec["I_links"], float),
        g_z=float(sec["g_z"]),
        joint1_max=float(sec["joint1_max"]),
        joint_sum_max=float(sec["joint_sum_max"]),
        alpha_max=float(sec["alpha_max"]),
        psi_ddot_max=float(sec["psi_ddot_max"]),
        theta_ddot_max=float(sec["theta_ddot_max"]),
        v_max=float(sec["v_max"]),
        tilt_max=float(sec["tilt_max"]),
    )


def _mpc(sec: dict, variant: str, t_s: float, params: AMParams) -> MpcConfig:
    w = sec["weights"]
    b = sec["barrier"]
    s = sec["sqp"]
    return MpcConfig(
        n=int(sec["n"]),
        T=float(t_s),
        variant=variant,
        **{k: float(v) for k, v in w.items()},
        barrier=BarrierParams(
            gamma=float(b["gamma"]),
            z=float(b["z"]),
            lam=float(b["lam"]),
            alpha_max=float(b["alpha_max"]),
            radial_floor=float(b["radial_floor"]),
        ),
        a_max=params.alpha_max,
        psi_ddot_max=params.psi_ddot_max,
        theta_ddot_max=params.theta_ddot_max,
        v_max=params.v_max,
        joint1_max=params.joint1_max,
        joint_sum_max=params.joint_sum_max,
        sqp=SqpOptions(max_iter=int(s["max_iter"]), tol=float(s["tol"]),
                       ctol=float(s["ctol"])),
    )


def _pid(sec: dict) -> PidGains:
    return PidGains(
        kp=float(sec["kp"]),
        ki=float(sec["ki"]),
        kd=float(sec["kd"]),
        i_limit=float(sec["i_limit"]),
        i_band=float(sec.get("i_band", np.inf)),
    )


def _gains(sec: dict) -> InnerGains:
    return InnerGains(
        attitude=_pid(sec["attitude"]),
        yaw=_pid(sec["yaw"]),
        height=_pid(sec["height"]),
        joint=_pid(sec["joint"]),
    )


def scenario_from_config(cfg: dict) -> Scenario:
    """Build the runnable Scenario described by a merged config dict."""
    sc = cfg["scenario"]
    params = _params(cfg["params"])
    traj = _trajectory(sc["trajectory"])
    case = sc["case"]
    walls = ()
    workspace = None
    if case == "WallAvoidance":
        w = sc["walls"]
        walls = boxing_walls(traj, clearance=float(w["clearance"]),
                             s_min=float(w["s_min"]))
    elif case == "WorkspaceBound":
        w = sc["workspace"]
        workspace = WorkspaceSphere(d_iw=np.asarray(w["d_iw"], float),
                                    r=float(w["r"]))
    return Scenario(
        trajectory=traj,
        case=case,
        variant=sc["variant"],
        walls=walls,
        workspace=workspace,
        disturbance=_disturbance(sc["disturbance"]),
        duration=float(sc["duration"]),
        t_s=float(sc["t_s"]),
        inner_substeps=int(sc["inner_substeps"]),
        mpc=_mpc(cfg["mpc"], sc["variant"], sc["t_s"], params),
        params=params,
        gains=_gains(cfg["gains"]),
    )
