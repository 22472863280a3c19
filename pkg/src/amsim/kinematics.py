"""Forward kinematics of the arm's critical points, wall clearance, and
workspace deviation.

Two state flavors are accepted: the full PlantState (used by the plant-side
safety checks and metrics, full attitude) and the 12-dimensional planner
state (used inside the optimizer, which carries yaw only and assumes
roll = pitch = 0).  Planner state layout:

    [p (0:3), v (3:6), psi (6), psi_dot (7), theta1 (8), theta2 (9),
     theta1_dot (10), theta2_dot (11)]

For planner states every point evaluation also returns position and
velocity Jacobians with respect to the 12 state entries; the optimizer
chains them through its prediction maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from amsim.dynamics import AMParams, PlantState, rotation_matrix
from amsim.errors import ConfigError

OUTER_DIM = 12
SL_P = slice(0, 3)
SL_V = slice(3, 6)
IX_PSI = 6
IX_DPSI = 7
SL_TH = slice(8, 10)
SL_DTH = slice(10, 12)

DEFAULT_SAFETY_RADII = (0.1, 0.1, 0.1)

POINT_IDS = ("base", "joint2", "end_effector")


@dataclass
class CriticalPoint:
    """One of the three monitored points, with planner-state Jacobians."""

    id: str
    position: np.ndarray
    velocity: np.ndarray
    safety_radius: float
    jac_p: np.ndarray | None = None
    jac_v: np.ndarray | None = None


@dataclass
class WallPlane:
    """Half-space boundary a x + b y + c z + d = 0; positive side is safe."""

    normal_coeffs: np.ndarray
    offset: float
    s_min: float = 0.1

    def __post_init__(self):
        n = np.asarray(self.normal_coeffs, dtype=float)
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            raise ConfigError("wall normal must be nonzero")
        if self.s_min <= 0:
            raise ConfigError("wall s_min must be positive")
        self.normal_coeffs = n / norm
        self.offset = float(self.offset) / norm

    def signed_distance(self, point: np.ndarray) -> float:
        return float(self.normal_coeffs @ np.asarray(point, float) + self.offset)


@dataclass
class WorkspaceSphere:
    """Spherical free-space bound on the UAV center, tied to the reference.

    The center rides at (trajectory point - d_iw); with the default offset
    pointing down the sphere sits above the end-effector path by the
    nominal arm drop.
    """

    d_iw: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -0.225]))
    r: float = 0.1

    def __post_init__(self):
        self.d_iw = np.asarray(self.d_iw, dtype=float)
        if self.r <= 0:
            raise ConfigError("workspace radius must be positive")

    def center(self, p_d: np.ndarray) -> np.ndarray:
        return np.asarray(p_d, float) - self.d_iw


def _u(a: float) -> np.ndarray:
    return np.array([np.sin(a), 0.0, -np.cos(a)])


def _du(a: float) -> np.ndarray:
    return np.array([np.cos(a), 0.0, np.sin(a)])


def _yaw_matrix(psi: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(psi), np.sin(psi)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    dR = np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])
    return R, dR


def _chain_offsets(params: AMParams, Theta, Theta_dot):
    """Body-frame attachment offsets of joint 2 and the end-effector.

    Returns (b, bdot, db, dbdot_dth) where b[k] is the offset, bdot[k] its
    body-frame rate, db[k] the 3x2 partial in Theta, and dbdot_dth[k] the
    3x2 partial of bdot in Theta.  Partials of bdot in Theta_dot equal db.
    """
    l1, l2 = params.l_links
    q1 = Theta[0]
    q12 = Theta[0] + Theta[1]
    dq1 = Theta_dot[0]
    dq12 = Theta_dot[0] + Theta_dot[1]

    u1, u12 = _u(q1), _u(q12)
    du1, du12 = _du(q1), _du(q12)

    b1 = l1 * u1
    b2 = b1 + l2 * u12
    b1dot = l1 * du1 * dq1
    b2dot = b1dot + l2 * du12 * dq12

    db1 = np.stack([l1 * du1, np.zeros(3)], axis=1)
    db2 = np.stack([l1 * du1 + l2 * du12, l2 * du12], axis=1)
    # d(du)/da = -u
    db1dot = np.stack([-l1 * u1 * dq1, np.zeros(3)], axis=1)
    db2dot = np.stack(
        [-l1 * u1 * dq1 - l2 * u12 * dq12, -l2 * u12 * dq12], axis=1
    )
    return (b1, b2), (b1dot, b2dot), (db1, db2), (db1dot, db2dot)


def _planner_point(x: np.ndarray, params: AMParams, which: int):
    """Position/velocity and Jacobians of chain point 1 (joint2) or 2 (EE)."""
    b, bdot, db, dbdot = _chain_offsets(params, x[SL_TH], x[SL_DTH])
    R, dR = _yaw_matrix(x[IX_PSI])
    wz = np.array([0.0, 0.0, x[IX_DPSI]])
    bk, bkdot, dbk, dbkdot = b[which], bdot[which], db[which], dbdot[which]

    pos = x[SL_P] + R @ bk
    rel = np.cross(wz, bk) + bkdot
    vel = x[SL_V] + R @ rel

    jac_p = np.zeros((3, OUTER_DIM))
    jac_p[:, SL_P] = np.eye(3)
    jac_p[:, IX_PSI] = dR @ bk
    jac_p[:, SL_TH] = R @ dbk

    jac_v = np.zeros((3, OUTER_DIM))
    jac_v[:, SL_V] = np.eye(3)
    jac_v[:, IX_PSI] = dR @ rel
    jac_v[:, IX_DPSI] = R @ np.cross([0.0, 0.0, 1.0], bk)
    # d(wz x b)/dtheta = wz x db, columnwise
    cross_term = np.cross(wz[None, :], dbk.T).T
    jac_v[:, SL_TH] = R @ (cross_term + dbkdot)
    jac_v[:, SL_DTH] = R @ dbk
    return pos, vel, jac_p, jac_v


def _plant_point(s: PlantState, params: AMParams, which: int):
    b, bdot, _, _ = _chain_offsets(params, s.Theta, s.Theta_dot)
    R = rotation_matrix(s.Phi)
    pos = s.p_I + R @ b[which]
    vel = s.v_I + R @ (np.cross(s.omega_B, b[which]) + bdot[which])
    return pos, vel


def end_effector_state(x, params: AMParams) -> tuple[np.ndarray, np.ndarray]:
    """Inertial end-effector position and velocity.

    PlantState inputs use the full attitude; 12-vector planner states use
    yaw only (roll = pitch = 0 inside the optimizer).
    """
    if isinstance(x, PlantState):
        return _plant_point(x, params, 1)
    pos, vel, _, _ = _planner_point(np.asarray(x, float), params, 1)
    return pos, vel


def critical_points(x, params: AMParams, radii=DEFAULT_SAFETY_RADII) -> list[CriticalPoint]:
    """Base, joint 2, and end-effector states, in that fixed order."""
    if isinstance(x, PlantState):
        pts = [CriticalPoint("base", x.p_I.copy(), x.v_I.copy(), radii[0])]
        for which, name in ((0, "joint2"), (1, "end_effector")):
            pos, vel = _plant_point(x, params, which)
            pts.append(CriticalPoint(name, pos, vel, radii[which + 1]))
        return pts

    x = np.asarray(x, float)
    jp0 = np.zeros((3, OUTER_DIM))
    jp0[:, SL_P] = np.eye(3)
    jv0 = np.zeros((3, OUTER_DIM))
    jv0[:, SL_V] = np.eye(3)
    pts = [
        CriticalPoint("base", x[SL_P].copy(), x[SL_V].copy(), radii[0], jp0, jv0)
    ]
    for which, name in ((0, "joint2"), (1, "end_effector")):
        pos, vel, jp, jv = _planner_point(x, params, which)
        pts.append(CriticalPoint(name, pos, vel, radii[which + 1], jp, jv))
    return pts


def wall_clearance(point: np.ndarray, wall: WallPlane) -> np.ndarray:
    """Perpendicular vector from the wall plane to the point."""
    return wall.signed_distance(point) * wall.normal_coeffs


def workspace_deviation(x, p_d: np.ndarray, ws: WorkspaceSphere) -> np.ndarray:
    """Offset of the UAV center from the moving workspace center."""
    if isinstance(x, PlantState):
        p = x.p_I
    else:
        p = np.asarray(x, float)[SL_P]
    return p - ws.center(p_d)
