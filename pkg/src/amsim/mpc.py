"""Receding-horizon acceleration planner for the flying arm.

The planner works on a reduced 12-state model: base position and velocity,
yaw and yaw rate, joint angles and joint rates.  Each of the six channels is
a double integrator driven by one entry of the commanded input
``[a_d, psi_ddot, Theta_ddot]``, so the discrete model is an exact
zero-order-hold map and the whole horizon is an affine function of the input
sequence.  Costs and constraint rows are differentiated analytically and
chained through precomputed input-to-state maps; the resulting nonlinear
program is handed to the SQP solver in :mod:`amsim.sqp`.

Safety handling comes in four variants:

* ``Naive``   tracking objective and input/state boxes only.
* ``HC``      hard geometric rows (clearance or containment) on every
              predicted state, including the fixed initial one.
* ``SC``      soft penalty terms added to the objective instead of rows.
* ``BLF``     discrete forward-invariance rows built from the braking-aware
              barriers in :mod:`amsim.blf`.
"""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .blf import (
    BarrierParams,
    signed_power,
    wall_barrier_from_point,
    workspace_barrier,
)
from .dynamics import AMParams, PlantState, euler_rates
from .errors import ConfigError, DegenerateCenter
from .kinematics import (
    DEFAULT_SAFETY_RADII,
    IX_DPSI,
    IX_PSI,
    OUTER_DIM,
    POINT_IDS,
    SL_DTH,
    SL_P,
    SL_TH,
    SL_V,
    WorkspaceSphere,
    critical_points,
)
from .sqp import SqpOptions, SqpResult, solve_sqp

N_INPUT = 6

VARIANT_NAIVE = "Naive"
VARIANT_HC = "HC"
VARIANT_SC = "SC"
VARIANT_BLF = "BLF"
VARIANTS = (VARIANT_NAIVE, VARIANT_HC, VARIANT_SC, VARIANT_BLF)

CASE_FREE = "Free"
CASE_WALLS = "WallAvoidance"
CASE_WORKSPACE = "WorkspaceBound"
CASES = (CASE_FREE, CASE_WALLS, CASE_WORKSPACE)

# (position row, velocity row, input column) of each double-integrator chain
_CHAINS = ((0, 3, 0), (1, 4, 1), (2, 5, 2), (6, 7, 3), (8, 10, 4), (9, 11, 5))

# floor on the squared clearance in the soft avoidance penalty
_SOFT_DEN_FLOOR = 1e-4
_SOFT_CLEARANCE_FLOOR = _SOFT_DEN_FLOOR**0.5

# de-rating of the joint braking authority assumed by the state box rows;
# the slack between 0.7 a and the full a absorbs inner-loop tracking error,
# which can cut real braking well below the planned feedforward when the
# joint PID fights a saturated brake command
_JOINT_BRAKE_DERATE = 0.7


@dataclass
class OuterState:
    """Planner-side state: translation, yaw and the two arm joints."""

    p_I: np.ndarray
    p_dot: np.ndarray
    psi: float
    psi_dot: float
    Theta: np.ndarray
    Theta_dot: np.ndarray

    def as_vector(self) -> np.ndarray:
        x = np.empty(OUTER_DIM)
        x[SL_P] = self.p_I
        x[SL_V] = self.p_dot
        x[IX_PSI] = self.psi
        x[IX_DPSI] = self.psi_dot
        x[SL_TH] = self.Theta
        x[SL_DTH] = self.Theta_dot
        return x

    @classmethod
    def from_vector(cls, x) -> "OuterState":
        x = np.asarray(x, float)
        if x.shape != (OUTER_DIM,):
            raise ConfigError(f"planner state must have {OUTER_DIM} entries")
        return cls(
            p_I=x[SL_P].copy(),
            p_dot=x[SL_V].copy(),
            psi=float(x[IX_PSI]),
            psi_dot=float(x[IX_DPSI]),
            Theta=x[SL_TH].copy(),
            Theta_dot=x[SL_DTH].copy(),
        )

    @classmethod
    def from_plant(cls, s: PlantState) -> "OuterState":
        """Project the full plant state down to the planner coordinates.

        Roll and pitch are dropped; the yaw rate is the exact kinematic one,
        not the body z rate.
        """
        return cls(
            p_I=s.p_I.copy(),
            p_dot=s.v_I.copy(),
            psi=float(s.Phi[2]),
            psi_dot=float(euler_rates(s.Phi, s.omega_B)[2]),
            Theta=s.Theta.copy(),
            Theta_dot=s.Theta_dot.copy(),
        )


def project_outer(s: PlantState) -> np.ndarray:
    """12-vector planner state extracted from a plant state."""
    return OuterState.from_plant(s).as_vector()


@dataclass
class ControlInput:
    """One planner input: commanded accelerations for all six channels."""

    a_d: np.ndarray
    psi_ddot: float
    Theta_ddot: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [np.asarray(self.a_d, float), [self.psi_ddot], np.asarray(self.Theta_ddot, float)]
        )

    @classmethod
    def from_vector(cls, u) -> "ControlInput":
        u = np.asarray(u, float)
        if u.shape != (N_INPUT,):
            raise ConfigError(f"planner input must have {N_INPUT} entries")
        return cls(a_d=u[0:3].copy(), psi_ddot=float(u[3]), Theta_ddot=u[4:6].copy())


@dataclass(frozen=True)
class MpcConfig:
    """Horizon, weights, bounds and variant selection for the planner."""

    n: int = 5
    T: float = 0.1
    variant: str = VARIANT_BLF
    # stage / terminal weight pairs for the individual cost terms
    w1: float = 10.0
    ws1: float = 50.0
    w2: float = 2.0
    ws2: float = 10.0
    w3: float = 1.0
    ws3: float = 5.0
    w4: float = 5.0
    ws4: float = 20.0
    w5: float = 5.0
    ws5: float = 20.0
    # small input regularizer; leaves equilibria alone (u = 0 there) but
    # damps bang-bang joint/yaw activity and keeps the subproblems well
    # conditioned enough to converge within the iteration cap
    w_u: float = 0.05
    barrier: BarrierParams = field(default_factory=BarrierParams)
    a_max: float = 2.0
    psi_ddot_max: float = 2.0
    theta_ddot_max: float = 10.0
    v_max: float = 2.0
    joint1_max: float = np.pi / 3
    joint_sum_max: float = np.pi / 2
    sqp: SqpOptions = field(default_factory=SqpOptions)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("horizon length must be at least 1")
        if self.T <= 0:
            raise ConfigError("step time must be positive")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        for name in ("w1", "ws1", "w2", "ws2", "w3", "ws3", "w4", "ws4", "w5", "ws5", "w_u"):
            if getattr(self, name) < 0:
                raise ConfigError(f"weight {name} must be nonnegative")
        for name in ("a_max", "psi_ddot_max", "theta_ddot_max", "v_max", "joint1_max", "joint_sum_max"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"bound {name} must be positive")

    @property
    def u_max(self) -> np.ndarray:
        return np.array(
            [self.a_max] * 3 + [self.psi_ddot_max] + [self.theta_ddot_max] * 2
        )


@dataclass(frozen=True)
class Geometry:
    """Safety geometry of a scenario as seen by the planner."""

    case: str = CASE_FREE
    walls: tuple = ()
    workspace: WorkspaceSphere | None = None
    radii: tuple = DEFAULT_SAFETY_RADII

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.case == CASE_WALLS and not self.walls:
            raise ConfigError("wall avoidance needs at least one wall")
        if self.case == CASE_WORKSPACE and self.workspace is None:
            raise ConfigError("workspace containment needs a workspace sphere")
        object.__setattr__(self, "walls", tuple(self.walls))


@dataclass(frozen=True)
class ReferenceWindow:
    """Desired end-effector positions and velocities over one horizon."""

    p_d: np.ndarray  # (n+1, 3)
    v_t: np.ndarray  # (n+1, 3)

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.p_d, float))
        v = np.atleast_2d(np.asarray(self.v_t, float))
        if p.shape != v.shape or p.ndim != 2 or p.shape[1] != 3:
            raise ConfigError("reference window needs matching (n+1, 3) arrays")
        object.__setattr__(self, "p_d", p)
        object.__setattr__(self, "v_t", v)

    @property
    def steps(self) -> int:
        return self.p_d.shape[0] - 1


def discretize(T: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact zero-order-hold model of the six double-integrator chains."""
    if T <= 0:
        raise ConfigError("step time must be positive")
    A = np.eye(OUTER_DIM)
    B = np.zeros((OUTER_DIM, N_INPUT))
    for pos, vel, col in _CHAINS:
        A[pos, vel] = T
        B[pos, col] = 0.5 * T * T
        B[vel, col] = T
    return A, B


@dataclass(frozen=True)
class PredictionMaps:
    """Precomputed affine maps from the input sequence to every state.

    ``gamma[i]`` is the (12, 6n) sensitivity of state i to the flattened
    input sequence; row blocks for j >= i are zero.  Gradients of any
    function of the rollout chain through these maps with one matrix
    product per step.
    """

    n: int
    T: float
    A: np.ndarray
    B: np.ndarray
    gamma: np.ndarray  # (n+1, 12, 6n)

    @classmethod
    def build(cls, T: float, n: int) -> "PredictionMaps":
        if n < 1:
            raise ConfigError("horizon length must be at least 1")
        A, B = discretize(T)
        gamma = np.zeros((n + 1, OUTER_DIM, N_INPUT * n))
        # powers[k] = A^k B
        power = B.copy()
        powers = [power]
        for _ in range(n - 1):
            power = A @ power
            powers.append(power)
        for i in range(1, n + 1):
            for j in range(i):
                gamma[i, :, N_INPUT * j : N_INPUT * (j + 1)] = powers[i - 1 - j]
        return cls(n=n, T=T, A=A, B=B, gamma=gamma)


def predict(x0, u_seq, model) -> np.ndarray:
    """Roll the discrete model forward; returns all n+1 states, x0 first."""
    if isinstance(model, PredictionMaps):
        A, B = model.A, model.B
    else:
        A, B = model
    x0 = np.asarray(x0, float)
    u_seq = np.atleast_2d(np.asarray(u_seq, float))
    n = u_seq.shape[0]
    xs = np.empty((n + 1, OUTER_DIM))
    xs[0] = x0
    for i in range(n):
        xs[i + 1] = A @ xs[i] + B @ u_seq[i]
    return xs


def _arm_com_x(params: AMParams, Theta) -> tuple[float, np.ndarray]:
    """Body-frame x coordinate of the arm center of mass and its partials."""
    m1, m2 = params.m_links
    l1, l2 = params.l_links
    t1 = Theta[0]
    t12 = Theta[0] + Theta[1]
    m_arm = m1 + m2
    cx = (m1 * 0.5 * l1 * np.sin(t1) + m2 * (l1 * np.sin(t1) + 0.5 * l2 * np.sin(t12))) / m_arm
    d1 = (m1 * 0.5 * l1 * np.cos(t1) + m2 * (l1 * np.cos(t1) + 0.5 * l2 * np.cos(t12))) / m_arm
    d2 = (m2 * 0.5 * l2 * np.cos(t12)) / m_arm
    return float(cx), np.array([d1, d2])


def _signed_power_slope(h: float, z: float) -> float:
    return z * max(abs(h), 1e-12) ** (z - 1.0)


def _cost_terms(xs, refs: ReferenceWindow, cfg: MpcConfig, geom: Geometry,
                params: AMParams, pts_list, want_grad: bool):
    """Shared cost kernel: term values plus per-state gradients."""
    n = cfg.n
    terms = {"l1": 0.0, "l2": 0.0, "l3": 0.0, "l4": 0.0, "l5": 0.0}
    dldx = np.zeros((n + 1, OUTER_DIM)) if want_grad else None
    soft_walls = cfg.variant == VARIANT_SC and geom.case == CASE_WALLS
    soft_dev = cfg.variant == VARIANT_SC and geom.case == CASE_WORKSPACE

    for i in range(n + 1):
        last = i == n
        w1 = cfg.ws1 if last else cfg.w1
        w2 = cfg.ws2 if last else cfg.w2
        w3 = cfg.ws3 if last else cfg.w3
        ee = pts_list[i][2]

        e1 = ee.position - refs.p_d[i]
        terms["l1"] += w1 * float(e1 @ e1)
        e2 = ee.velocity - refs.v_t[i]
        terms["l2"] += w2 * float(e2 @ e2)
        cx, dcx = _arm_com_x(params, xs[i][SL_TH])
        terms["l3"] += w3 * cx * cx
        if want_grad:
            dldx[i] += 2.0 * w1 * (e1 @ ee.jac_p)
            dldx[i] += 2.0 * w2 * (e2 @ ee.jac_v)
            dldx[i][SL_TH] += 2.0 * w3 * cx * dcx

        if soft_walls:
            w4 = cfg.ws4 if last else cfg.w4
            for wall in geom.walls:
                for pt in pts_list[i]:
                    q = wall.signed_distance(pt.position) - wall.s_min
                    qe = max(q, _SOFT_CLEARANCE_FLOOR)
                    terms["l4"] += w4 / (qe * qe)
                    if want_grad and q > _SOFT_CLEARANCE_FLOOR:
                        dldx[i] += (-2.0 * w4 / qe**3) * (wall.normal_coeffs @ pt.jac_p)
        if soft_dev:
            w5 = cfg.ws5 if last else cfg.w5
            ws = geom.workspace
            d_vec = xs[i][SL_P] - (refs.p_d[i] - ws.d_iw)
            if float(np.linalg.norm(d_vec)) >= ws.r:
                terms["l5"] += w5 * float(d_vec @ d_vec)
                if want_grad:
                    dldx[i][SL_P] += 2.0 * w5 * d_vec
    return terms, dldx


def cost_terms(x_seq, u_seq, refs: ReferenceWindow, cfg: MpcConfig,
               geom: Geometry, params: AMParams) -> dict:
    """Breakdown of the horizon objective into its named terms."""
    xs = np.atleast_2d(np.asarray(x_seq, float))
    us = np.atleast_2d(np.asarray(u_seq, float))
    pts_list = [critical_points(x, params, geom.radii) for x in xs]
    terms, _ = _cost_terms(xs, refs, cfg, geom, params, pts_list, want_grad=False)
    terms["lu"] = cfg.w_u * float(np.sum(us * us))
    terms["total"] = sum(terms.values())
    return terms


def evaluate_cost(x_seq, u_seq, refs: ReferenceWindow, cfg: MpcConfig,
                  geom: Geometry, params: AMParams) -> float:
    """Scalar horizon objective for a given rollout."""
    return cost_terms(x_seq, u_seq, refs, cfg, geom, params)["total"]


def barrier_families(cfg: MpcConfig, geom: Geometry):
    """Barrier families the geometry implies, as (label, selector) pairs."""
    if geom.case == CASE_WALLS:
        return [
            (f"w{k}_{pid}", ("wall", k, idx))
            for k in range(len(geom.walls))
            for idx, pid in enumerate(POINT_IDS)
        ]
    if geom.case == CASE_WORKSPACE:
        return [("ws_out", ("workspace", "outward")), ("ws_in", ("workspace", "inward"))]
    return []


def assemble_constraints(x_seq, u_seq, cfg: MpcConfig, geom: Geometry,
                         params: AMParams, refs: ReferenceWindow | None = None,
                         maps: PredictionMaps | None = None,
                         pts_list=None):
    """Inequality residuals g(u) >= 0 for one rollout.

    Returns ``(g, J, groups)``.  J is the Jacobian with respect to the
    flattened input sequence and is only built when the prediction maps are
    supplied; groups maps row labels to index slices of g.
    """
    xs = np.atleast_2d(np.asarray(x_seq, float))
    us = np.atleast_2d(np.asarray(u_seq, float))
    n = us.shape[0]
    want_jac = maps is not None
    nu = N_INPUT * n
    if pts_list is None:
        pts_list = [critical_points(x, params, geom.radii) for x in xs]

    g_rows: list[float] = []
    j_rows: list[np.ndarray] = []
    groups: dict[str, slice] = {}

    def mark(label: str, start: int):
        groups[label] = slice(start, len(g_rows))

    # input box, both sides, one block per step
    start = len(g_rows)
    u_max = cfg.u_max
    for j in range(n):
        for k in range(N_INPUT):
            g_rows.append(u_max[k] - us[j, k])
            g_rows.append(us[j, k] + u_max[k])
            if want_jac:
                up = np.zeros(nu)
                up[N_INPUT * j + k] = -1.0
                j_rows.append(up)
                j_rows.append(-up)
    mark("input_box", start)

    # state boxes on the states the inputs can still influence
    start = len(g_rows)
    brake = 2.0 * _JOINT_BRAKE_DERATE * cfg.theta_ddot_max
    for i in range(1, n + 1):
        x = xs[i]
        for axis in range(3):
            for sign in (1.0, -1.0):
                g_rows.append(cfg.v_max - sign * x[SL_V][axis])
                if want_jac:
                    row = np.zeros(OUTER_DIM)
                    row[SL_V.start + axis] = -sign
                    j_rows.append(row @ maps.gamma[i])
        th1 = x[SL_TH][0]
        th12 = x[SL_TH][0] + x[SL_TH][1]
        for val, cols, bound in (
            (th1, (1.0, 0.0), cfg.joint1_max),
            (th12, (1.0, 1.0), cfg.joint_sum_max),
        ):
            for sign in (1.0, -1.0):
                g_rows.append(bound - sign * val)
                if want_jac:
                    row = np.zeros(OUTER_DIM)
                    row[SL_TH] = -sign * np.asarray(cols)
                    j_rows.append(row @ maps.gamma[i])
        # a plain position box is not invariant for a double integrator:
        # a state can sit inside the box with too much speed to stop.  The
        # stopping point under de-rated braking must respect the limit too,
        # or a short horizon steers into states no next solve can fix
        rate1 = x[SL_DTH][0]
        rate12 = x[SL_DTH][0] + x[SL_DTH][1]
        for val, rate, cols, bound in (
            (th1, rate1, (1.0, 0.0), cfg.joint1_max),
            (th12, rate12, (1.0, 1.0), cfg.joint_sum_max),
        ):
            for sign in (1.0, -1.0):
                adv = max(sign * rate, 0.0)  # speed toward this stop
                g_rows.append(bound - sign * val - adv * adv / brake)
                if want_jac:
                    row = np.zeros(OUTER_DIM)
                    row[SL_TH] = -sign * np.asarray(cols)
                    row[SL_DTH] = -sign * (2.0 * adv / brake) * np.asarray(cols)
                    j_rows.append(row @ maps.gamma[i])
    mark("state_box", start)

    if cfg.variant == VARIANT_HC:
        start = len(g_rows)
        if geom.case == CASE_WALLS:
            # clearance on every predicted state, the fixed first one included
            for i in range(n + 1):
                for wall in geom.walls:
                    for pt in pts_list[i]:
                        g_rows.append(wall.signed_distance(pt.position) - wall.s_min)
                        if want_jac:
                            row = wall.normal_coeffs @ pt.jac_p
                            j_rows.append(row @ maps.gamma[i])
        elif geom.case == CASE_WORKSPACE:
            if refs is None:
                raise ConfigError("workspace containment rows need the reference window")
            ws = geom.workspace
            # squared form keeps the row smooth at the center
            for i in range(n + 1):
                d_vec = xs[i][SL_P] - (refs.p_d[i] - ws.d_iw)
                g_rows.append(ws.r**2 - float(d_vec @ d_vec))
                if want_jac:
                    row = np.zeros(OUTER_DIM)
                    row[SL_P] = -2.0 * d_vec
                    j_rows.append(row @ maps.gamma[i])
        mark("hc", start)

    if cfg.variant == VARIANT_BLF:
        bp = cfg.barrier
        T = cfg.T
        for label, spec_tuple in barrier_families(cfg, geom):
            start = len(g_rows)
            values = []
            for i in range(n + 1):
                if spec_tuple[0] == "wall":
                    _, wk, pidx = spec_tuple
                    values.append(
                        wall_barrier_from_point(pts_list[i][pidx], geom.walls[wk], bp)
                    )
                else:
                    if refs is None:
                        raise ConfigError("containment barriers need the reference window")
                    try:
                        values.append(
                            workspace_barrier(
                                xs[i], geom.workspace, refs.p_d[i], refs.v_t[i], bp,
                                side=spec_tuple[1],
                            )
                        )
                    except DegenerateCenter:
                        values.append(None)
            # rows span planned pairs only: the measured state's own decrease
            # condition is not a decision the inputs can change, and near the
            # riding gap one disturbance kick moves h by more than a step of
            # input authority can restore.  A one-step horizon has no planned
            # pair and so carries no rows; it simply cannot look far enough
            # ahead to enforce invariance
            for i in range(1, n):
                now, nxt = values[i], values[i + 1]
                if now is None or nxt is None:
                    continue
                g_rows.append(
                    (nxt.h - now.h) / T + bp.gamma * (signed_power(now.h, bp.z) - bp.lam)
                )
                if want_jac:
                    coef_now = -1.0 / T + bp.gamma * _signed_power_slope(now.h, bp.z)
                    row = (nxt.grad_x @ maps.gamma[i + 1]) / T
                    row = row + coef_now * (now.grad_x @ maps.gamma[i])
                    j_rows.append(row)
            mark(f"blf:{label}", start)

    g = np.array(g_rows)
    J = np.array(j_rows) if want_jac else None
    if want_jac and len(j_rows) == 0:
        J = np.zeros((0, nu))
    return g, J, groups


@dataclass
class HorizonSolution:
    """One planner solve: inputs, predicted states and solver diagnostics."""

    u_seq: np.ndarray  # (n, 6)
    x_seq: np.ndarray  # (n+1, 12)
    cost: float
    constraint_residuals: np.ndarray
    residual_groups: dict
    solver_status: str
    iterations: int
    kkt_residual: float
    merit_history: list
    solve_time: float

    def control_inputs(self) -> list[ControlInput]:
        return [ControlInput.from_vector(u) for u in self.u_seq]

    def first_input(self) -> ControlInput:
        return ControlInput.from_vector(self.u_seq[0])

    def group_residuals(self, label: str) -> np.ndarray:
        return self.constraint_residuals[self.residual_groups[label]]


class _Evaluator:
    """Caches full (cost, gradient, constraints) evaluations per input."""

    def __init__(self, x0, maps: PredictionMaps, refs: ReferenceWindow,
                 cfg: MpcConfig, geom: Geometry, params: AMParams):
        self.x0 = np.asarray(x0, float)
        self.maps = maps
        self.refs = refs
        self.cfg = cfg
        self.geom = geom
        self.params = params
        self._cache: OrderedDict[bytes, dict] = OrderedDict()

    def full(self, u_flat: np.ndarray) -> dict:
        key = u_flat.tobytes()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        cfg = self.cfg
        us = u_flat.reshape(cfg.n, N_INPUT)
        xs = predict(self.x0, us, self.maps)
        pts_list = [critical_points(x, self.params, self.geom.radii) for x in xs]
        terms, dldx = _cost_terms(
            xs, self.refs, cfg, self.geom, self.params, pts_list, want_grad=True
        )
        grad = np.zeros(N_INPUT * cfg.n)
        for i in range(1, cfg.n + 1):
            grad += dldx[i] @ self.maps.gamma[i]
        f = sum(terms.values()) + cfg.w_u * float(u_flat @ u_flat)
        grad = grad + 2.0 * cfg.w_u * u_flat
        g, J, groups = assemble_constraints(
            xs, us, cfg, self.geom, self.params, refs=self.refs,
            maps=self.maps, pts_list=pts_list,
        )
        out = {
            "f": f,
            "grad": grad,
            "g": g,
            "J": J,
            "groups": groups,
            "xs": xs,
        }
        self._cache[key] = out
        if len(self._cache) > 8:
            self._cache.popitem(last=False)
        return out


def warm_start(previous: np.ndarray | HorizonSolution | None, n: int) -> np.ndarray:
    """Shift the previous input plan one step and repeat its last entry."""
    if previous is None:
        return np.zeros((n, N_INPUT))
    if isinstance(previous, HorizonSolution):
        previous = previous.u_seq
    prev = np.atleast_2d(np.asarray(previous, float))
    if prev.shape != (n, N_INPUT):
        raise ConfigError(f"warm start plan must be ({n}, {N_INPUT})")
    shifted = np.vstack([prev[1:], prev[-1:]])
    return shifted


def solve_step(x0, refs: ReferenceWindow, cfg: MpcConfig, geom: Geometry,
               params: AMParams, warm: np.ndarray | HorizonSolution | None = None,
               maps: PredictionMaps | None = None) -> HorizonSolution:
    """Solve one receding-horizon problem from the measured planner state."""
    x0 = np.asarray(x0, float)
    if refs.steps != cfg.n:
        raise ConfigError("reference window length must match the horizon")
    if maps is None or maps.n != cfg.n or maps.T != cfg.T:
        maps = PredictionMaps.build(cfg.T, cfg.n)
    ev = _Evaluator(x0, maps, refs, cfg, geom, params)

    def fun(u):
        out = ev.full(u)
        return out["f"], out["grad"]

    def cons(u):
        out = ev.full(u)
        return out["g"], out["J"]

    u_init = warm_start(warm, cfg.n).ravel()
    # a joint stop crash in the plant, or both joint channels demanding
    # the shared actuator for braking at once, can leave the measured
    # state where no single input honors every state box row; those rows
    # are priced instead of hardened, which changes nothing wherever the
    # hard problem is feasible but returns the least-violation plan
    # instead of failing where it is not
    soft = np.zeros(ev.full(u_init)["g"].size, bool)
    sb = ev.full(u_init)["groups"].get("state_box")
    if sb is not None:
        soft[sb] = True

    t0 = time.perf_counter()
    res: SqpResult = solve_sqp(fun, cons, u_init, cfg.sqp, soft=soft)
    elapsed = time.perf_counter() - t0

    final = ev.full(res.u)
    return HorizonSolution(
        u_seq=res.u.reshape(cfg.n, N_INPUT),
        x_seq=final["xs"],
        cost=float(final["f"]),
        constraint_residuals=final["g"],
        residual_groups=final["groups"],
        solver_status=res.status,
        iterations=res.iterations,
        kkt_residual=res.kkt_residual,
        merit_history=res.merit_history,
        solve_time=elapsed,
    )
