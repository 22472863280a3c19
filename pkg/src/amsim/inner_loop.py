"""Fast attitude, thrust and joint tracking under the planner.

The planner hands down commanded accelerations at 10 Hz; this layer turns
them into attitude and thrust references and regulates them at 100 Hz with
per-channel PIDs.  The tilt mapping is the small-angle inversion of the
thrust direction at the current yaw:

    theta_d = (a_x cos(psi) + a_y sin(psi)) / g_z
    phi_d   = (a_x sin(psi) - a_y cos(psi)) / g_z
    thrust  = m_am (g_z + a_z)

with both tilt angles clamped to the platform limit.  Height and yaw get
feedforward from the planned trajectory so the PIDs only clean up model
mismatch; the joint channel is almost pure feedforward because the plant
integrates joint accelerations directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import AMParams, PlantState, euler_rates
from .errors import ConfigError


def _wrap(angle: float) -> float:
    return float(np.arctan2(np.sin(angle), np.cos(angle)))


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float = 0.0
    kd: float = 0.0
    i_limit: float = np.inf
    # integrate only inside this error band, so transients cannot charge
    # the integrator and drag a slow tail behind every step
    i_band: float = np.inf

    def __post_init__(self):
        if self.kp < 0 or self.ki < 0 or self.kd < 0 or self.i_limit <= 0 or self.i_band <= 0:
            raise ConfigError("PID gains must be nonnegative with positive integral limits")


@dataclass(frozen=True)
class InnerGains:
    """Gain set for the four inner channels; roll and pitch share one."""

    attitude: PidGains = field(default_factory=lambda: PidGains(420.0, 400.0, 36.9, 0.1, 0.03))
    yaw: PidGains = field(default_factory=lambda: PidGains(420.0, 400.0, 36.9, 0.1, 0.03))
    height: PidGains = field(default_factory=lambda: PidGains(64.0, 20.0, 16.0, 0.2, 0.02))
    joint: PidGains = field(default_factory=lambda: PidGains(100.0, 0.0, 20.0, 1.0))


@dataclass
class InnerRefs:
    """References held constant over one planner interval."""

    phi_d: float
    theta_d: float
    psi_d: float
    thrust_d: float
    Theta_d: np.ndarray
    # feedforward and height-channel extras from the planned rollout
    z_d: float = 0.0
    vz_d: float = 0.0
    az_ff: float = 0.0
    psi_dot_d: float = 0.0
    psi_ddot_ff: float = 0.0
    Theta_dot_d: np.ndarray = field(default_factory=lambda: np.zeros(2))
    Theta_ddot_ff: np.ndarray = field(default_factory=lambda: np.zeros(2))


def acceleration_to_attitude(a_d, psi: float, params: AMParams) -> tuple[float, float, float]:
    """Map a commanded acceleration to tilt references and feedforward thrust."""
    a_d = np.asarray(a_d, float)
    g = params.g_z
    theta_d = (a_d[0] * np.cos(psi) + a_d[1] * np.sin(psi)) / g
    phi_d = (a_d[0] * np.sin(psi) - a_d[1] * np.cos(psi)) / g
    lim = params.tilt_max
    theta_d = float(np.clip(theta_d, -lim, lim))
    phi_d = float(np.clip(phi_d, -lim, lim))
    thrust_d = params.m_am * (g + a_d[2])
    return phi_d, theta_d, float(thrust_d)


def refs_from_plan(u0, x1, psi: float, params: AMParams) -> InnerRefs:
    """Build inner references from the first planned input and next state.

    ``u0`` is the flattened planner input for the coming interval, ``x1``
    the state the plan predicts at its end, ``psi`` the current yaw.
    """
    u0 = np.asarray(u0, float)
    x1 = np.asarray(x1, float)
    phi_d, theta_d, thrust_d = acceleration_to_attitude(u0[0:3], psi, params)
    return InnerRefs(
        phi_d=phi_d,
        theta_d=theta_d,
        psi_d=float(x1[6]),
        thrust_d=thrust_d,
        Theta_d=x1[8:10].copy(),
        z_d=float(x1[2]),
        vz_d=float(x1[5]),
        az_ff=float(u0[2]),
        psi_dot_d=float(x1[7]),
        psi_ddot_ff=float(u0[3]),
        Theta_dot_d=x1[10:12].copy(),
        Theta_ddot_ff=u0[4:6].copy(),
    )


class InnerLoop:
    """Stateful 100 Hz regulator; one instance per episode, reset between."""

    def __init__(self, params: AMParams, gains: InnerGains | None = None, dt: float = 0.01):
        if dt <= 0:
            raise ConfigError("inner step time must be positive")
        self.params = params
        self.gains = gains or InnerGains()
        self.dt = dt
        self.reset()

    def reset(self):
        self._i_att = np.zeros(3)  # roll, pitch, yaw integrators
        self._i_z = 0.0
        self._i_joint = np.zeros(2)

    def _integrate(self, store, idx, err, gains: PidGains):
        if abs(err) < gains.i_band:
            store[idx] = np.clip(store[idx] + err * self.dt, -gains.i_limit, gains.i_limit)
        return store[idx]

    def step(self, refs: InnerRefs, s: PlantState) -> tuple[float, np.ndarray, np.ndarray]:
        """One control tick: returns (thrust, body torque, joint accelerations)."""
        p = self.params
        ga, gy, gz, gj = self.gains.attitude, self.gains.yaw, self.gains.height, self.gains.joint
        rates = euler_rates(s.Phi, s.omega_B)

        e_att = np.array([
            refs.phi_d - s.Phi[0],
            refs.theta_d - s.Phi[1],
            _wrap(refs.psi_d - s.Phi[2]),
        ])
        self._integrate(self._i_att, 0, e_att[0], ga)
        self._integrate(self._i_att, 1, e_att[1], ga)
        self._integrate(self._i_att, 2, e_att[2], gy)

        alpha_cmd = np.array([
            ga.kp * e_att[0] + ga.ki * self._i_att[0] - ga.kd * rates[0],
            ga.kp * e_att[1] + ga.ki * self._i_att[1] - ga.kd * rates[1],
            gy.kp * e_att[2] + gy.ki * self._i_att[2] + gy.kd * (refs.psi_dot_d - rates[2])
            + refs.psi_ddot_ff,
        ])
        tau_B = p.I_B @ alpha_cmd

        e_z = refs.z_d - s.p_I[2]
        if abs(e_z) < gz.i_band:
            self._i_z = float(np.clip(self._i_z + e_z * self.dt, -gz.i_limit, gz.i_limit))
        az_cmd = refs.az_ff + gz.kp * e_z + gz.kd * (refs.vz_d - s.v_I[2]) + gz.ki * self._i_z
        # keep the vertical thrust component honest under tilt
        tilt = max(np.cos(s.Phi[0]) * np.cos(s.Phi[1]), 0.5)
        thrust = p.m_am * (p.g_z + az_cmd) / tilt
        thrust = float(np.clip(thrust, 0.0, 2.0 * p.m_am * p.g_z))

        e_j = refs.Theta_d - s.Theta
        for k in range(2):
            self._integrate(self._i_joint, k, e_j[k], gj)
        theta_ddot = (
            refs.Theta_ddot_ff
            + gj.kp * e_j
            + gj.ki * self._i_joint
            + gj.kd * (refs.Theta_dot_d - s.Theta_dot)
        )
        theta_ddot = np.clip(theta_ddot, -p.theta_ddot_max, p.theta_ddot_max)
        return thrust, tau_B, theta_ddot


def hold_refs(s: PlantState, params: AMParams) -> InnerRefs:
    """References that hold the current pose at hover thrust."""
    return InnerRefs(
        phi_d=0.0,
        theta_d=0.0,
        psi_d=float(s.Phi[2]),
        thrust_d=params.m_am * params.g_z,
        Theta_d=s.Theta.copy(),
        z_d=float(s.p_I[2]),
        vz_d=0.0,
    )


def step_response(params: AMParams, gains: InnerGains, channel: str,
                  step: float = 0.1, t_final: float = 2.0,
                  Theta0=(0.0, 0.0)) -> dict:
    """Closed-loop step metrics on the nonlinear plant for one channel.

    Returns settle time into the 2 percent band, fractional overshoot, the
    final error, and the last time the error exceeded 1e-3.
    """
    from .dynamics import PlantInputs, integrate

    s = PlantState(
        p_I=np.array([0.0, 0.0, 1.0]),
        v_I=np.zeros(3),
        Phi=np.zeros(3),
        omega_B=np.zeros(3),
        Theta=np.asarray(Theta0, float),
        Theta_dot=np.zeros(2),
    )
    loop = InnerLoop(params, gains)
    refs = hold_refs(s, params)
    probes = {
        "roll": (lambda r: setattr(r, "phi_d", step), lambda st: st.Phi[0]),
        "pitch": (lambda r: setattr(r, "theta_d", step), lambda st: st.Phi[1]),
        "yaw": (lambda r: setattr(r, "psi_d", step), lambda st: st.Phi[2]),
        "height": (lambda r: setattr(r, "z_d", r.z_d + step), lambda st: st.p_I[2] - 1.0),
        "joint": (lambda r: r.Theta_d.__setitem__(0, step), lambda st: st.Theta[0]),
    }
    if channel not in probes:
        raise ConfigError(f"unknown channel {channel!r}")
    mutate, probe = probes[channel]
    mutate(refs)
    dt = loop.dt
    ys = []
    for _ in range(int(round(t_final / dt))):
        thrust, tau_B, theta_ddot = loop.step(refs, s)
        s, _ = integrate(params, s, PlantInputs(thrust=thrust, tau_B=tau_B, Theta_ddot=theta_ddot), dt)
        ys.append(probe(s))
    ys = np.array(ys)
    ts = dt * np.arange(1, len(ys) + 1)
    err = np.abs(ys - step)
    outside = err > 0.02 * abs(step)
    over = err > 1e-3
    return {
        "settle_time": float(ts[outside][-1]) if outside.any() else 0.0,
        "overshoot": float(max(0.0, (ys.max() - step) / step)),
        "final_error": float(err[-1]),
        "time_to_1e3": float(ts[over][-1]) if over.any() else 0.0,
    }


def tune_inner_gains(params: AMParams, verbose: bool = False) -> InnerGains:
    """Search attitude and height gains against the step targets.

    Coarse grid over stiffness and damping with conditional integral trim;
    candidates must settle a 0.1 rad tilt step within 0.5 s at no more than
    20 percent overshoot and be within 1e-3 rad by 2 s, also with the arm
    swung out sideways.  Best candidate by combined settle and trim time.
    """
    best, best_score = None, np.inf
    for kp in (250.0, 300.0, 350.0, 420.0):
        for damping in (0.9, 1.0):
            kd = float(round(2.0 * damping * np.sqrt(kp), 1))
            for ki in (200.0, 400.0):
                att = PidGains(kp, ki, kd, 0.1, 0.03)
                gains = InnerGains(attitude=att, yaw=att)
                nominal = step_response(params, gains, "roll")
                swung = step_response(params, gains, "pitch", Theta0=(np.pi / 2 - 0.6, 0.0))
                ok = (
                    nominal["settle_time"] <= 0.5
                    and nominal["overshoot"] <= 0.2
                    and nominal["time_to_1e3"] <= 2.0 - 1e-9
                    and swung["time_to_1e3"] <= 2.0 - 1e-9
                )
                score = nominal["settle_time"] + 0.5 * nominal["time_to_1e3"] + 0.3 * swung["time_to_1e3"]
                if verbose:
                    print(f"kp={kp:6.1f} ki={ki:5.1f} kd={kd:5.1f} "
                          f"settle={nominal['settle_time']:.2f}s ov={nominal['overshoot']*100:5.1f}% "
                          f"score={score:.3f} {'ok' if ok else 'rejected'}")
                if ok and score < best_score:
                    best, best_score = gains, score
    if best is None:
        raise ConfigError("no gain candidate met the step targets")
    height_best, height_score = best.height, np.inf
    for kp, ki, kd in ((36.0, 10.0, 12.0), (49.0, 10.0, 14.0), (64.0, 20.0, 16.0)):
        candidate = PidGains(kp, ki, kd, 0.2, 0.02)
        gains = InnerGains(attitude=best.attitude, yaw=best.yaw,
                           height=candidate, joint=best.joint)
        r = step_response(params, gains, "height")
        # prefer the softest gains that still settle quickly without overshoot
        score = r["settle_time"] + 0.001 * kp
        if r["settle_time"] <= 1.0 and r["overshoot"] <= 0.05 and score < height_score:
            height_best, height_score = candidate, score
    return InnerGains(attitude=best.attitude, yaw=best.yaw, height=height_best, joint=best.joint)
