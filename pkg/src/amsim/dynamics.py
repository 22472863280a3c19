"""Rigid-body plant: quadrotor base with a planar two-link arm.

Frames and conventions, used everywhere downstream:

* inertial frame z-up, gravity (0, 0, -g_z)
* body frame x forward, y left, z up; attitude Phi = (roll, pitch, yaw)
  composed as R = Rz(yaw) Ry(pitch) Rx(roll), so positive pitch tilts the
  thrust axis toward inertial +x
* both arm joints rotate about body -y; joint angles are measured from the
  hanging direction (-z) toward +x, so the link pointing along
  (sin a, 0, -cos a) corresponds to angle a
* links are uniform rods: CoM mid-link, inertia zero about the long axis
  and the catalog value about any transverse axis

The coupled base-arm acceleration is solved exactly: a Newton-Euler sweep
over the arm with the base acceleration zeroed gives the configuration and
rate dependent part of the reaction wrench, and the remaining unknowns
(base linear and angular acceleration) enter linearly through the composite
spatial inertia about the base origin.  That 6x6 system is symmetric
positive definite for any sane mass budget.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from amsim.errors import ConfigError, SingularAttitude

# both joints swing the links from -z toward +x, i.e. rotate about -y
JOINT_AXIS = np.array([0.0, -1.0, 0.0])

_EULER_EPS = 1e-9


def _u(a: float) -> np.ndarray:
    """Unit vector along a link at angle a, in body coordinates."""
    return np.array([np.sin(a), 0.0, -np.cos(a)])


def _du(a: float) -> np.ndarray:
    return np.array([np.cos(a), 0.0, np.sin(a)])


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rotation_matrix(Phi: np.ndarray) -> np.ndarray:
    """Body-to-inertial rotation for Phi = (roll, pitch, yaw), ZYX order."""
    cr, sr = np.cos(Phi[0]), np.sin(Phi[0])
    cp, sp = np.cos(Phi[1]), np.sin(Phi[1])
    cy, sy = np.cos(Phi[2]), np.sin(Phi[2])
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def euler_rate_matrix(Phi: np.ndarray) -> np.ndarray:
    """Map from body angular velocity to Euler angle rates."""
    cr, sr = np.cos(Phi[0]), np.sin(Phi[0])
    cp = np.cos(Phi[1])
    if abs(cp) < _EULER_EPS:
        raise SingularAttitude(f"pitch {Phi[1]:.6f} rad is at the representation singularity")
    tp = np.tan(Phi[1])
    return np.array(
        [
            [1.0, sr * tp, cr * tp],
            [0.0, cr, -sr],
            [0.0, sr / cp, cr / cp],
        ]
    )


def euler_rates(Phi: np.ndarray, omega_B: np.ndarray) -> np.ndarray:
    return euler_rate_matrix(Phi) @ omega_B


@dataclass(frozen=True)
class AMParams:
    """Physical constants and hardware limits of the platform."""

    m_am: float
    I_B: np.ndarray
    m_links: np.ndarray
    l_links: np.ndarray
    I_links: np.ndarray
    g_z: float = 9.81
    joint1_max: float = np.pi / 3
    joint_sum_max: float = np.pi / 2
    alpha_max: float = 2.0
    psi_ddot_max: float = 2.0
    theta_ddot_max: float = 10.0
    v_max: float = 2.0
    tilt_max: float = np.pi / 10

    def __post_init__(self):
        for name in ("m_links", "l_links", "I_links"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        object.__setattr__(self, "I_B", np.asarray(self.I_B, dtype=float))
        if self.m_am <= 0 or np.any(self.m_links <= 0) or np.any(self.l_links <= 0):
            raise ConfigError("masses and link lengths must be positive")
        if self.m_B <= 0:
            raise ConfigError("arm outweighs the total platform mass")

    @property
    def m_B(self) -> float:
        """Base (quadrotor) mass: total minus both links."""
        return self.m_am - float(self.m_links.sum())

    @property
    def m_arm(self) -> float:
        return float(self.m_links.sum())

    @classmethod
    def default(cls) -> "AMParams":
        return cls(
            m_am=3.5,
            I_B=np.diag([0.3, 0.3, 0.6]),
            m_links=np.array([0.1, 0.1]),
            l_links=np.array([0.15, 0.15]),
            I_links=np.array([4.256e-5, 8.321e-5]),
        )

    def link_directions(self, Theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _u(Theta[0]), _u(Theta[0] + Theta[1])

    def link_com_positions(self, Theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Link CoM offsets from the base origin, body frame."""
        u1, u2 = self.link_directions(Theta)
        l1, l2 = self.l_links
        return 0.5 * l1 * u1, l1 * u1 + 0.5 * l2 * u2

    def arm_first_moment(self, Theta: np.ndarray) -> np.ndarray:
        r1, r2 = self.link_com_positions(Theta)
        return self.m_links[0] * r1 + self.m_links[1] * r2

    def arm_com_body(self, Theta: np.ndarray) -> np.ndarray:
        return self.arm_first_moment(Theta) / self.m_arm

    def link_inertia_central(self, u: np.ndarray, which: int) -> np.ndarray:
        """Central inertia tensor of a rod pointing along u, body axes."""
        return self.I_links[which] * (np.eye(3) - np.outer(u, u))

    def am_inertia(self, Theta: np.ndarray) -> np.ndarray:
        """Composite inertia about the base origin at joint pose Theta."""
        u1, u2 = self.link_directions(Theta)
        I = np.array(self.I_B)
        for which, (u, r) in enumerate(zip((u1, u2), self.link_com_positions(Theta))):
            I = I + self.link_inertia_central(u, which)
            I = I + self.m_links[which] * ((r @ r) * np.eye(3) - np.outer(r, r))
        return I


@dataclass
class PlantState:
    """Full 16-dimensional plant state."""

    p_I: np.ndarray
    v_I: np.ndarray
    Phi: np.ndarray
    omega_B: np.ndarray
    Theta: np.ndarray
    Theta_dot: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.p_I, self.v_I, self.Phi, self.omega_B, self.Theta, self.Theta_dot]
        )

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "PlantState":
        x = np.asarray(x, dtype=float)
        return cls(
            p_I=x[0:3].copy(),
            v_I=x[3:6].copy(),
            Phi=x[6:9].copy(),
            omega_B=x[9:12].copy(),
            Theta=x[12:14].copy(),
            Theta_dot=x[14:16].copy(),
        )

    def copy(self) -> "PlantState":
        return PlantState.from_vector(self.as_vector())


@dataclass
class PlantInputs:
    """Actuation for one integration interval, held constant across it."""

    thrust: float
    tau_B: np.ndarray
    Theta_ddot: np.ndarray
    disturbance: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class Wrench:
    """Force and torque pair, body frame, torque about the base origin."""

    force: np.ndarray
    torque: np.ndarray


@dataclass
class LinkKinematics:
    """Per-link motion from the forward sweep, body frame, rows = links."""

    u: np.ndarray
    joint_pos: np.ndarray
    com_pos: np.ndarray
    omega: np.ndarray
    alpha: np.ndarray
    a_joint: np.ndarray
    a_c: np.ndarray


@dataclass
class StepInfo:
    """Diagnostics from one integration step."""

    a_I: np.ndarray
    omega_dot: np.ndarray
    joint_clamped: bool


def forward_recursion(
    params: AMParams,
    Theta: np.ndarray,
    Theta_dot: np.ndarray,
    Theta_ddot: np.ndarray,
    omega_B: np.ndarray,
    alpha_B: np.ndarray,
    a_B: np.ndarray,
) -> LinkKinematics:
    """Outward Newton-Euler sweep: link velocities and accelerations.

    a_B is the true acceleration of the base origin expressed in body axes;
    gravity is not folded in here (the backward sweep subtracts it).
    """
    l1, l2 = params.l_links
    u1, u2 = params.link_directions(Theta)
    r1c = 0.5 * l1 * u1
    b1 = l1 * u1
    r2c = 0.5 * l2 * u2

    w1 = omega_B + JOINT_AXIS * Theta_dot[0]
    al1 = alpha_B + JOINT_AXIS * Theta_ddot[0] + np.cross(omega_B, JOINT_AXIS * Theta_dot[0])
    a_j1 = np.asarray(a_B, dtype=float)
    a_c1 = a_j1 + np.cross(al1, r1c) + np.cross(w1, np.cross(w1, r1c))

    a_j2 = a_j1 + np.cross(al1, b1) + np.cross(w1, np.cross(w1, b1))
    w2 = w1 + JOINT_AXIS * Theta_dot[1]
    al2 = al1 + JOINT_AXIS * Theta_ddot[1] + np.cross(w1, JOINT_AXIS * Theta_dot[1])
    a_c2 = a_j2 + np.cross(al2, r2c) + np.cross(w2, np.cross(w2, r2c))

    return LinkKinematics(
        u=np.stack([u1, u2]),
        joint_pos=np.stack([np.zeros(3), b1]),
        com_pos=np.stack([r1c, b1 + r2c]),
        omega=np.stack([w1, w2]),
        alpha=np.stack([al1, al2]),
        a_joint=np.stack([a_j1, a_j2]),
        a_c=np.stack([a_c1, a_c2]),
    )


def backward_recursion(
    params: AMParams, kin: LinkKinematics, g_B: np.ndarray
) -> tuple[Wrench, tuple[np.ndarray, np.ndarray]]:
    """Inward Newton-Euler sweep.

    Returns the reaction wrench the arm exerts on the base (joint 1 sits at
    the base origin, so force and torque are both taken there) plus the
    torque vectors each parent applies about joints 1 and 2.
    """
    m1, m2 = params.m_links
    Ic1 = params.link_inertia_central(kin.u[0], 0)
    Ic2 = params.link_inertia_central(kin.u[1], 1)

    F2 = m2 * (kin.a_c[1] - g_B)
    n2 = (
        Ic2 @ kin.alpha[1]
        + np.cross(kin.omega[1], Ic2 @ kin.omega[1])
        + np.cross(kin.com_pos[1] - kin.joint_pos[1], F2)
    )

    F1g = m1 * (kin.a_c[0] - g_B)
    F1 = F1g + F2
    n1 = (
        Ic1 @ kin.alpha[0]
        + np.cross(kin.omega[0], Ic1 @ kin.omega[0])
        + np.cross(kin.com_pos[0], F1g)
        + np.cross(kin.joint_pos[1], F2)
        + n2
    )

    return Wrench(force=-F1, torque=-n1), (n1, n2)


def arm_bias_wrench(params: AMParams, state: PlantState, Theta_ddot: np.ndarray) -> Wrench:
    """Reaction wrench with the base acceleration terms zeroed out.

    This is the configuration, rate, and joint-command dependent slice of
    the coupling; am_acceleration adds the base-acceleration part exactly.
    """
    kin = forward_recursion(
        params,
        state.Theta,
        state.Theta_dot,
        np.asarray(Theta_ddot, dtype=float),
        omega_B=state.omega_B,
        alpha_B=np.zeros(3),
        a_B=np.zeros(3),
    )
    g_B = rotation_matrix(state.Phi).T @ np.array([0.0, 0.0, -params.g_z])
    return backward_recursion(params, kin, g_B)[0]


def am_acceleration(
    params: AMParams,
    state: PlantState,
    thrust: float,
    tau_B: np.ndarray,
    arm_wrench: Wrench,
    disturbance: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the coupled 6x6 system for base acceleration.

    arm_wrench must come from arm_bias_wrench at the same state; the
    returned linear acceleration is inertial with the disturbance added.
    """
    R = rotation_matrix(state.Phi)
    g_B = R.T @ np.array([0.0, 0.0, -params.g_z])
    S = _skew(params.arm_first_moment(state.Theta))

    M = np.zeros((6, 6))
    M[:3, :3] = params.m_am * np.eye(3)
    M[:3, 3:] = -S
    M[3:, :3] = S
    M[3:, 3:] = params.am_inertia(state.Theta)

    rhs = np.empty(6)
    rhs[:3] = params.m_B * g_B + np.array([0.0, 0.0, thrust]) + arm_wrench.force
    rhs[3:] = tau_B + arm_wrench.torque - np.cross(state.omega_B, params.I_B @ state.omega_B)

    sol = np.linalg.solve(M, rhs)
    a_I = R @ sol[:3] + np.asarray(disturbance, dtype=float)
    return a_I, sol[3:]


def _derivative(params: AMParams, x: np.ndarray, inputs: PlantInputs) -> np.ndarray:
    s = PlantState.from_vector(x)
    wrench = arm_bias_wrench(params, s, inputs.Theta_ddot)
    a_I, omega_dot = am_acceleration(
        params, s, inputs.thrust, inputs.tau_B, wrench, inputs.disturbance
    )
    xdot = np.empty(16)
    xdot[0:3] = s.v_I
    xdot[3:6] = a_I
    xdot[6:9] = euler_rates(s.Phi, s.omega_B)
    xdot[9:12] = omega_dot
    xdot[12:14] = s.Theta_dot
    xdot[14:16] = inputs.Theta_ddot
    return xdot


def _wrap_pi(a: float) -> float:
    w = (a + np.pi) % (2.0 * np.pi) - np.pi
    return np.pi if w == -np.pi else w


def integrate(
    params: AMParams, state: PlantState, inputs: PlantInputs, dt: float
) -> tuple[PlantState, StepInfo]:
    """One RK4 step with inputs held constant.

    After the step the yaw is wrapped to (-pi, pi] and the joints are
    clamped at their hardware stops (rates zeroed so they do not keep
    pushing outward); StepInfo reports whether a clamp fired.
    """
    x0 = state.as_vector()
    k1 = _derivative(params, x0, inputs)
    k2 = _derivative(params, x0 + 0.5 * dt * k1, inputs)
    k3 = _derivative(params, x0 + 0.5 * dt * k2, inputs)
    k4 = _derivative(params, x0 + dt * k3, inputs)
    x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    if abs(x1[6]) >= np.pi / 2 or abs(x1[7]) >= np.pi / 2:
        raise SingularAttitude("roll or pitch reached pi/2 during the step")
    x1[8] = _wrap_pi(x1[8])

    clamped = False
    if abs(x1[12]) > params.joint1_max:
        x1[12] = np.clip(x1[12], -params.joint1_max, params.joint1_max)
        x1[14] = 0.0
        clamped = True
    s12 = x1[12] + x1[13]
    if abs(s12) > params.joint_sum_max:
        x1[13] = np.sign(s12) * params.joint_sum_max - x1[12]
        x1[15] = -x1[14]
        clamped = True

    info = StepInfo(a_I=k1[3:6].copy(), omega_dot=k1[9:12].copy(), joint_clamped=clamped)
    return PlantState.from_vector(x1), info


def kinetic_energy(params: AMParams, state: PlantState) -> float:
    """Total kinetic energy of base plus links."""
    R = rotation_matrix(state.Phi)
    v_B = R.T @ state.v_I
    w = state.omega_B
    ke = 0.5 * params.m_B * v_B @ v_B + 0.5 * w @ params.I_B @ w

    q1, q2 = state.Theta
    dq1, dq2 = state.Theta_dot
    l1, l2 = params.l_links
    r = params.link_com_positions(state.Theta)
    rdot = (
        0.5 * l1 * _du(q1) * dq1,
        l1 * _du(q1) * dq1 + 0.5 * l2 * _du(q1 + q2) * (dq1 + dq2),
    )
    u1, u2 = params.link_directions(state.Theta)
    w_link = (w + JOINT_AXIS * dq1, w + JOINT_AXIS * (dq1 + dq2))
    for i, u in enumerate((u1, u2)):
        v_ci = v_B + np.cross(w, r[i]) + rdot[i]
        Ic = params.link_inertia_central(u, i)
        ke += 0.5 * params.m_links[i] * v_ci @ v_ci + 0.5 * w_link[i] @ Ic @ w_link[i]
    return float(ke)
