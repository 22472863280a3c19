"""Closed-loop episode runner, logging, metrics and benchmark grids.

Ties the pieces together: a scenario fixes the geometry, reference
trajectory, disturbance model and controller configuration; running an
episode alternates one planner solve per outer period with ten inner PID
steps on the nonlinear plant, recording one log row per outer step.
Safety failures (wall penetration, workspace exit, an infeasible solve)
are recorded outcomes, not exceptions.

Episode logs round-trip through CSV with a fixed column layout:

    t, 12 state fields, 6 input fields, pe_xyz, ref_xyz,
    (h_<family>, res_<family>) per barrier family,
    clear_<wall>_<point> per wall and critical point, bound_s_min,
    deviation, bound_r, solver_status, dist_xyz

Geometry-dependent groups are present only when the scenario has the
matching geometry.  Floats are written with repr so a parsed file
reproduces the in-memory values bit for bit; solve times are wall-clock
measurements and deliberately stay out of the file so repeated runs of
one seed produce identical bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .blf import wall_barrier_from_point, workspace_barrier
from .dynamics import AMParams, PlantInputs, PlantState, integrate
from .errors import ConfigError, DegenerateCenter, EmptyLog, SchemaError
from .inner_loop import InnerGains, InnerLoop, refs_from_plan
from .kinematics import POINT_IDS, WallPlane, WorkspaceSphere, critical_points, end_effector_state
from .mpc import (
    CASE_FREE,
    CASE_WALLS,
    CASE_WORKSPACE,
    CASES,
    VARIANT_BLF,
    VARIANT_HC,
    VARIANT_NAIVE,
    VARIANT_SC,
    VARIANTS,
    Geometry,
    MpcConfig,
    PredictionMaps,
    ReferenceWindow,
    barrier_families,
    project_outer,
    solve_step,
)
from .sqp import INFEASIBLE

TRAJECTORY_KINDS = ("line", "circle", "helix", "lissajous")
DISTURBANCE_KINDS = ("none", "uniform")

OUTCOME_COMPLETED = "completed"
OUTCOME_VIOLATED = "violated"
OUTCOME_INFEASIBLE = "infeasible"

STATE_COLUMNS = (
    "x", "y", "z", "vx", "vy", "vz",
    "psi", "psi_dot", "theta1", "theta2", "theta1_dot", "theta2_dot",
)
INPUT_COLUMNS = ("ax", "ay", "az", "psi_ddot", "theta1_ddot", "theta2_ddot")

@dataclass(frozen=True)
class TrajectorySpec:
    """Analytic end-effector reference with an exact velocity profile.

    kind "circle" and "helix" orbit `center` at `radius` once per
    `period`; "helix" additionally climbs at `climb` m/s.  kind "line"
    moves from `center` to `end` at constant speed over one `period` and
    holds the endpoint afterwards; `end=None` degenerates to a hover.
    kind "lissajous" runs `amplitude * sin(harmonic * base_rate * t)`
    per axis around `center`.
    """

    kind: str = "circle"
    center: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    radius: float = 1.0
    period: float = 60.0
    end: np.ndarray | None = None
    climb: float = 0.0
    amplitude: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.5, 0.2]))
    harmonics: tuple = (1, 2, 2)

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ConfigError(f"unknown trajectory kind {self.kind!r}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "amplitude", np.asarray(self.amplitude, dtype=float))
        if self.end is not None:
            object.__setattr__(self, "end", np.asarray(self.end, dtype=float))
        if self.period <= 0:
            raise ConfigError("trajectory period must be positive")
        if self.radius < 0:
            raise ConfigError("trajectory radius must be nonnegative")

    @classmethod
    def hover(cls, point) -> "TrajectorySpec":
        point = np.asarray(point, dtype=float)
        return cls(kind="line", center=point, end=point.copy())

    @property
    def rate(self) -> float:
        return 2.0 * np.pi / self.period

    def max_acceleration(self) -> float:
        """Upper bound on the reference acceleration magnitude."""
        if self.kind in ("circle", "helix"):
            return self.radius * self.rate**2
        if self.kind == "lissajous":
            peaks = self.amplitude * (np.asarray(self.harmonics, float) * self.rate) ** 2
            return float(np.linalg.norm(peaks))
        return 0.0


def generate_trajectory(spec: TrajectorySpec, t):
    """Reference position and exact velocity at time(s) t.

    Scalar t gives a pair of 3-vectors, an array of m times gives a pair
    of (m, 3) arrays.
    """
    ts = np.asarray(t, dtype=float)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    m = ts.shape[0]
    p = np.tile(spec.center, (m, 1))
    v = np.zeros((m, 3))

    if spec.kind in ("circle", "helix"):
        ang = spec.rate * ts
        p[:, 0] += spec.radius * np.cos(ang)
        p[:, 1] += spec.radius * np.sin(ang)
        v[:, 0] = -spec.radius * spec.rate * np.sin(ang)
        v[:, 1] = spec.radius * spec.rate * np.cos(ang)
        if spec.kind == "helix":
            p[:, 2] += spec.climb * ts
            v[:, 2] = spec.climb
    elif spec.kind == "lissajous":
        for j in range(3):
            wj = spec.harmonics[j] * spec.rate
            p[:, j] += spec.amplitude[j] * np.sin(wj * ts)
            v[:, j] = spec.amplitude[j] * wj * np.cos(wj * ts)
    else:
        end = spec.center if spec.end is None else spec.end
        span = end - spec.center
        frac = np.clip(ts / spec.period, 0.0, 1.0)
        p = spec.center[None, :] + frac[:, None] * span[None, :]
        moving = (ts >= 0.0) & (ts < spec.period)
        v[moving] = span / spec.period

    if scalar:
        return p[0], v[0]
    return p, v


def reference_window(spec: TrajectorySpec, t0: float, n: int, T: float) -> ReferenceWindow:
    """Horizon slice of the reference starting at t0."""
    ts = t0 + T * np.arange(n + 1)
    p, v = generate_trajectory(spec, ts)
    return ReferenceWindow(p, v)


@dataclass(frozen=True)
class DisturbanceSpec:
    """Bounded random acceleration acting on the UAV center."""

    kind: str = "none"
    d_m: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ConfigError(f"unknown disturbance kind {self.kind!r}")
        if self.d_m < 0:
            raise ConfigError("disturbance amplitude must be nonnegative")

    @classmethod
    def uniform(cls, d_m: float, seed: int = 0) -> "DisturbanceSpec":
        return cls(kind="uniform", d_m=d_m, seed=seed)

    @property
    def active(self) -> bool:
        return self.kind == "uniform" and self.d_m > 0.0


def sample_disturbance(rng: np.random.Generator, d_m: float) -> np.ndarray:
    """One piecewise-constant disturbance draw, i.i.d. per component."""
    if d_m < 0:
        raise ConfigError("disturbance amplitude must be nonnegative")
    if d_m == 0.0:
        return np.zeros(3)
    return rng.uniform(-d_m, d_m, size=3)


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one closed-loop episode."""

    trajectory: TrajectorySpec
    case: str = CASE_FREE
    variant: str = VARIANT_BLF
    walls: tuple = ()
    workspace: WorkspaceSphere | None = None
    disturbance: DisturbanceSpec = field(default_factory=DisturbanceSpec)
    duration: float = 120.0
    t_s: float = 0.1
    inner_substeps: int = 10
    mpc: MpcConfig = field(default_factory=MpcConfig)
    params: AMParams = field(default_factory=AMParams.default)
    gains: InnerGains = field(default_factory=InnerGains)
    initial: PlantState | None = None

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        object.__setattr__(self, "walls", tuple(self.walls))
        if self.case == CASE_WALLS and not self.walls:
            raise ConfigError("wall avoidance needs at least one wall")
        if self.case == CASE_WORKSPACE and self.workspace is None:
            raise ConfigError("workspace containment needs a workspace sphere")
        if self.duration <= 0 or self.t_s <= 0:
            raise ConfigError("duration and outer period must be positive")
        steps = round(self.duration / self.t_s)
        if steps < 1 or abs(steps * self.t_s - self.duration) > 1e-9 * max(1.0, self.duration):
            raise ConfigError("duration must be an integral number of outer steps")
        if self.inner_substeps < 1:
            raise ConfigError("need at least one inner step per outer step")
        if self.trajectory.max_acceleration() > 0.5 * self.mpc.a_max + 1e-12:
            raise ConfigError("reference acceleration exceeds half the commanded-acceleration bound")

    @property
    def steps(self) -> int:
        return round(self.duration / self.t_s)

    @property
    def inner_dt(self) -> float:
        return self.t_s / self.inner_substeps

    @property
    def planner_config(self) -> MpcConfig:
        # the scenario owns the variant and outer period; keep one source
        return replace(self.mpc, variant=self.variant, T=self.t_s)

    @property
    def geometry(self) -> Geometry:
        return Geometry(case=self.case, walls=self.walls, workspace=self.workspace)


def fold_joints(params: AMParams, drop: float) -> np.ndarray:
    """Symmetric arm fold placing the end-effector straight below the base."""
    reach = float(params.l_links.sum())
    if not 0.0 < drop <= reach + 1e-12:
        raise ConfigError(f"fold drop {drop} outside the arm's reach (0, {reach}]")
    th1 = float(np.arccos(min(1.0, drop / reach)))
    if th1 > params.joint1_max + 1e-12 or th1 > params.joint_sum_max + 1e-12:
        raise ConfigError("fold drop violates a joint stop")
    return np.array([th1, -2.0 * th1])


def initial_plant_state(sc: Scenario) -> PlantState:
    """Level hover with the folded arm's end-effector on the reference start.

    Workspace scenarios fold the arm to the sphere's vertical offset so the
    UAV center starts at the workspace center; everything else hangs the
    arm straight down, which also centers the arm's mass.
    """
    p0, _ = generate_trajectory(sc.trajectory, 0.0)
    if sc.workspace is not None:
        d_iw = sc.workspace.d_iw
        if abs(d_iw[0]) > 1e-12 or abs(d_iw[1]) > 1e-12:
            raise ConfigError("default initial state needs a vertical workspace offset")
        drop = float(-d_iw[2])
    else:
        drop = float(sc.params.l_links.sum())
    return PlantState(
        p_I=p0 + np.array([0.0, 0.0, drop]),
        v_I=np.zeros(3),
        Phi=np.zeros(3),
        omega_B=np.zeros(3),
        Theta=fold_joints(sc.params, drop),
        Theta_dot=np.zeros(2),
    )


def _check_initial_safety(sc: Scenario, state: PlantState) -> None:
    if sc.case == CASE_WALLS:
        pts = critical_points(state, sc.params)
        for wall in sc.walls:
            for pt in pts:
                if wall.signed_distance(pt.position) <= wall.s_min:
                    raise ConfigError(f"initial state puts {pt.id} inside a wall margin")
    elif sc.case == CASE_WORKSPACE:
        p0, _ = generate_trajectory(sc.trajectory, 0.0)
        dev = np.linalg.norm(state.p_I - sc.workspace.center(p0))
        if dev >= sc.workspace.r:
            raise ConfigError("initial UAV center outside the workspace sphere")


# ---------------------------------------------------------------------------
# scenario builders

def default_trajectory(radius: float = 1.0, period: float = 60.0,
                       altitude: float = 1.0) -> TrajectorySpec:
    """Horizontal circle, the fixed reference for all benchmark cells."""
    return TrajectorySpec(kind="circle", center=np.array([0.0, 0.0, altitude]),
                          radius=radius, period=period)


def boxing_walls(traj: TrajectorySpec, clearance: float = 0.5,
                 s_min: float = 0.1) -> tuple:
    """Three axis-aligned planes around a circular reference.

    Planes cap +x, +y and the floor at `clearance` from the circle's
    closest approach.  The clearance is measured to the end-effector
    path; the folded arm keeps the other critical points higher and
    closer to the circle's axis, but a swinging arm eats into the +x/+y
    gap, so discriminating scenarios use a tighter clearance than the
    exploratory default.
    """
    if traj.kind not in ("circle", "helix") or traj.radius <= 0:
        raise ConfigError("wall layout is defined around a circular reference")
    cx, cy, cz = traj.center
    r = traj.radius
    return (
        WallPlane(normal_coeffs=[-1.0, 0.0, 0.0], offset=cx + r + clearance, s_min=s_min),
        WallPlane(normal_coeffs=[0.0, -1.0, 0.0], offset=cy + r + clearance, s_min=s_min),
        WallPlane(normal_coeffs=[0.0, 0.0, 1.0], offset=-(cz - clearance), s_min=s_min),
    )


def case1_scenario(variant: str = VARIANT_BLF, d_m: float = 0.8, *,
                   clearance: float = 0.5, duration: float = 120.0,
                   mpc: MpcConfig | None = None,
                   params: AMParams | None = None) -> Scenario:
    """Wall-avoidance benchmark scenario on the default circle."""
    traj = default_trajectory()
    dist = DisturbanceSpec.uniform(d_m) if d_m > 0 else DisturbanceSpec()
    return Scenario(
        trajectory=traj,
        case=CASE_WALLS,
        variant=variant,
        walls=boxing_walls(traj, clearance=clearance),
        disturbance=dist,
        duration=duration,
        mpc=mpc if mpc is not None else MpcConfig(),
        params=params if params is not None else AMParams.default(),
    )


def case2_scenario(variant: str = VARIANT_BLF, d_m: float = 0.8, *,
                   radius: float = 0.1, duration: float = 120.0,
                   mpc: MpcConfig | None = None,
                   params: AMParams | None = None) -> Scenario:
    """Workspace-containment benchmark scenario on the default circle."""
    dist = DisturbanceSpec.uniform(d_m) if d_m > 0 else DisturbanceSpec()
    return Scenario(
        trajectory=default_trajectory(),
        case=CASE_WORKSPACE,
        variant=variant,
        workspace=WorkspaceSphere(r=radius),
        disturbance=dist,
        duration=duration,
        mpc=mpc if mpc is not None else MpcConfig(),
        params=params if params is not None else AMParams.default(),
    )


# ---------------------------------------------------------------------------
# episode log

@dataclass
class EpisodeLog:
    """Per-outer-step record of one episode.

    Arrays share a leading dimension of one row per outer step; a solver
    abort truncates the log at the failing step and records the reason.
    """

    t: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    p_e: np.ndarray
    ref_p: np.ndarray
    barrier_labels: tuple
    barrier_h: np.ndarray
    barrier_res: np.ndarray
    clearance_labels: tuple
    clearances: np.ndarray
    deviation: np.ndarray
    statuses: tuple
    solve_times: np.ndarray
    disturbances: np.ndarray
    s_min: float
    ws_r: float
    outcome: str
    violation_step: int | None
    abort_step: int | None
    scenario: Scenario | None = None
    seed: int | None = None

    @property
    def rows(self) -> int:
        return int(self.t.shape[0])

    def columns(self) -> list:
        cols = ["t", *STATE_COLUMNS, *INPUT_COLUMNS,
                "pe_x", "pe_y", "pe_z", "ref_x", "ref_y", "ref_z"]
        for lab in self.barrier_labels:
            cols += [f"h_{lab}", f"res_{lab}"]
        cols += [f"clear_{lab}" for lab in self.clearance_labels]
        if self.clearance_labels:
            cols.append("bound_s_min")
        if np.isfinite(self.ws_r):
            cols += ["deviation", "bound_r"]
        cols += ["solver_status", "dist_x", "dist_y", "dist_z"]
        return cols

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.columns())
            for i in range(self.rows):
                row = [repr(float(self.t[i]))]
                row += [repr(float(v)) for v in self.states[i]]
                row += [repr(float(v)) for v in self.inputs[i]]
                row += [repr(float(v)) for v in self.p_e[i]]
                row += [repr(float(v)) for v in self.ref_p[i]]
                for j in range(len(self.barrier_labels)):
                    row.append(repr(float(self.barrier_h[i, j])))
                    row.append(repr(float(self.barrier_res[i, j])))
                row += [repr(float(v)) for v in self.clearances[i]]
                if self.clearance_labels:
                    row.append(repr(float(self.s_min)))
                if np.isfinite(self.ws_r):
                    row.append(repr(float(self.deviation[i])))
                    row.append(repr(float(self.ws_r)))
                row.append(self.statuses[i])
                row += [repr(float(v)) for v in self.disturbances[i]]
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "EpisodeLog":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError("episode file has no header row") from None
            data = list(reader)
        return _parse_episode(header, data)


def _parse_episode(header, data) -> EpisodeLog:
    fixed = ["t", *STATE_COLUMNS, *INPUT_COLUMNS,
             "pe_x", "pe_y", "pe_z", "ref_x", "ref_y", "ref_z"]
    if header[: len(fixed)] != fixed:
        raise SchemaError("episode header does not start with the fixed field block")
    pos = len(fixed)

    barrier_labels = []
    while pos < len(header) and header[pos].startswith("h_"):
        lab = header[pos][2:]
        if pos + 1 >= len(header) or header[pos + 1] != f"res_{lab}":
            raise SchemaError(f"barrier column h_{lab} lacks its residual twin")
        barrier_labels.append(lab)
        pos += 2

    clearance_labels = []
    while pos < len(header) and header[pos].startswith("clear_"):
        clearance_labels.append(header[pos][len("clear_"):])
        pos += 1
    has_smin = pos < len(header) and header[pos] == "bound_s_min"
    if bool(clearance_labels) != has_smin:
        raise SchemaError("clearance columns and bound_s_min must appear together")
    if has_smin:
        pos += 1

    has_ws = pos + 1 < len(header) and header[pos] == "deviation" and header[pos + 1] == "bound_r"
    if has_ws:
        pos += 2

    tail = ["solver_status", "dist_x", "dist_y", "dist_z"]
    if header[pos:] != tail:
        raise SchemaError("episode header does not end with status and disturbance fields")

    n = len(data)
    width = len(header)
    t = np.empty(n)
    states = np.empty((n, 12))
    inputs = np.empty((n, 6))
    p_e = np.empty((n, 3))
    ref_p = np.empty((n, 3))
    nb = len(barrier_labels)
    nc = len(clearance_labels)
    barrier_h = np.empty((n, nb))
    barrier_res = np.empty((n, nb))
    clearances = np.empty((n, nc))
    deviation = np.full(n, np.nan)
    disturbances = np.empty((n, 3))
    statuses = []
    s_min = np.nan
    ws_r = np.nan

    status_col = pos
    for i, raw in enumerate(data):
        if len(raw) != width:
            raise SchemaError(f"row {i} has {len(raw)} fields, expected {width}")
        try:
            vals = [float(v) for v in raw[:status_col]]
            disturbances[i] = [float(v) for v in raw[status_col + 1:]]
        except ValueError as exc:
            raise SchemaError(f"row {i}: {exc}") from None
        statuses.append(raw[status_col])
        t[i] = vals[0]
        states[i] = vals[1:13]
        inputs[i] = vals[13:19]
        p_e[i] = vals[19:22]
        ref_p[i] = vals[22:25]
        c = 25
        for j in range(nb):
            barrier_h[i, j] = vals[c]
            barrier_res[i, j] = vals[c + 1]
            c += 2
        for j in range(nc):
            clearances[i, j] = vals[c]
            c += 1
        if has_smin:
            s_min = vals[c]
            c += 1
        if has_ws:
            deviation[i] = vals[c]
            ws_r = vals[c + 1]

    outcome, violation_step, abort_step = _derive_outcome(
        tuple(statuses), clearances, s_min, deviation, ws_r)
    return EpisodeLog(
        t=t, states=states, inputs=inputs, p_e=p_e, ref_p=ref_p,
        barrier_labels=tuple(barrier_labels), barrier_h=barrier_h,
        barrier_res=barrier_res, clearance_labels=tuple(clearance_labels),
        clearances=clearances, deviation=deviation, statuses=tuple(statuses),
        solve_times=np.full(n, np.nan), disturbances=disturbances,
        s_min=float(s_min), ws_r=float(ws_r), outcome=outcome,
        violation_step=violation_step, abort_step=abort_step,
    )


def _derive_outcome(statuses, clearances, s_min, deviation, ws_r):
    """Classify an episode from its logged rows.

    An infeasible solve can only appear on the final row (the run aborts
    there); safety violations are judged from the same per-row values the
    log persists, so a reloaded file classifies identically.
    """
    violation_step = None
    if clearances.size and np.isfinite(s_min):
        bad = np.where(np.min(clearances, axis=1) < s_min)[0]
        if bad.size:
            violation_step = int(bad[0])
    if np.isfinite(ws_r):
        finite = np.isfinite(deviation)
        bad = np.where(finite & (deviation > ws_r))[0]
        if bad.size and (violation_step is None or bad[0] < violation_step):
            violation_step = int(bad[0])
    if statuses and statuses[-1] == INFEASIBLE:
        return OUTCOME_INFEASIBLE, violation_step, len(statuses) - 1
    if violation_step is not None:
        return OUTCOME_VIOLATED, violation_step, None
    return OUTCOME_COMPLETED, None, None


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class Metrics:
    """Episode summary in the benchmark's comparison quantities."""

    completed: bool
    te: float
    c_e: float
    c_s: float
    min_clearance: float
    max_deviation: float
    mean_solve_time: float


def compute_metrics(log: EpisodeLog) -> Metrics:
    """Aggregate one log; effort and smoothness are per-step averages.

    mean_solve_time reflects wall-clock measurements and is nan for logs
    reloaded from CSV; every other field is reproducible from the file.
    """
    n = log.rows
    if n == 0:
        raise EmptyLog("cannot summarize an episode with no rows")
    err = log.p_e - log.ref_p
    te = float(np.sqrt(np.mean(np.sum(err * err, axis=1))))
    c_e = float(np.sum(log.inputs * log.inputs) / n)
    c_s = float(np.sum(np.abs(np.diff(log.inputs, axis=0))) / n)
    min_clear = float(np.min(log.clearances)) if log.clearances.size else float("nan")
    if np.isfinite(log.ws_r) and np.any(np.isfinite(log.deviation)):
        max_dev = float(np.nanmax(log.deviation))
    else:
        max_dev = float("nan")
    return Metrics(
        completed=log.outcome == OUTCOME_COMPLETED,
        te=te,
        c_e=c_e,
        c_s=c_s,
        min_clearance=min_clear,
        max_deviation=max_dev,
        mean_solve_time=float(np.mean(log.solve_times)),
    )


# ---------------------------------------------------------------------------
# episode runner

def _barrier_values_now(x, sc: Scenario, geom, cfg, p_d, v_t):
    """Solver-facing barrier values at the current projected state."""
    bp = cfg.barrier
    vals = []
    if sc.case == CASE_WALLS:
        pts = critical_points(x, sc.params, geom.radii)
        for wall in sc.walls:
            for pt in pts:
                vals.append(wall_barrier_from_point(pt, wall, bp).h)
    elif sc.case == CASE_WORKSPACE:
        for side in ("outward", "inward"):
            try:
                vals.append(workspace_barrier(x, sc.workspace, p_d, v_t, bp, side=side).h)
            except DegenerateCenter:
                vals.append(np.nan)
    return vals


def _residuals_now(sol, labels, variant):
    if variant != VARIANT_BLF:
        return [np.nan] * len(labels)
    out = []
    for lab in labels:
        rows = sol.group_residuals(f"blf:{lab}")
        out.append(float(np.min(rows)) if rows.size else np.nan)
    return out


def run_episode(sc: Scenario, seed: int | None = None):
    """Run one closed-loop episode; returns (EpisodeLog, Metrics).

    Pattern per outer step: project the plant into the planner state,
    solve the horizon problem, log the step, then hold the first input
    and one fresh disturbance draw through the inner substeps.  An
    infeasible solve aborts; safety violations are recorded and the run
    continues so the log shows the full excursion.
    """
    params = sc.params
    cfg = sc.planner_config
    geom = sc.geometry
    state = sc.initial.copy() if sc.initial is not None else initial_plant_state(sc)
    _check_initial_safety(sc, state)

    if seed is None:
        seed = sc.disturbance.seed
    rng = np.random.default_rng(seed)
    inner = InnerLoop(params, sc.gains, dt=sc.inner_dt)
    maps = PredictionMaps.build(cfg.T, cfg.n)
    labels = tuple(lab for lab, _ in barrier_families(cfg, geom))
    clear_labels = tuple(
        f"w{k}_{pid}" for k in range(len(sc.walls)) for pid in POINT_IDS
    ) if sc.case == CASE_WALLS else ()
    s_min = min(w.s_min for w in sc.walls) if clear_labels else float("nan")
    ws_r = float(sc.workspace.r) if sc.case == CASE_WORKSPACE else float("nan")

    rows_t, rows_x, rows_u, rows_pe, rows_ref = [], [], [], [], []
    rows_h, rows_res, rows_clear, rows_dev = [], [], [], []
    statuses, rows_time, rows_dist = [], [], []
    warm = None
    aborted = False

    for k in range(sc.steps):
        t_k = k * sc.t_s
        x = project_outer(state)
        refs = reference_window(sc.trajectory, t_k, cfg.n, cfg.T)
        sol = solve_step(x, refs, cfg, geom, params, warm=warm, maps=maps)

        p_ref, v_ref = refs.p_d[0], refs.v_t[0]
        p_e, _ = end_effector_state(state, params)
        rows_t.append(t_k)
        rows_x.append(x)
        rows_u.append(sol.u_seq[0].copy())
        rows_pe.append(p_e)
        rows_ref.append(p_ref.copy())
        rows_h.append(_barrier_values_now(x, sc, geom, cfg, p_ref, v_ref))
        rows_res.append(_residuals_now(sol, labels, sc.variant))
        if sc.case == CASE_WALLS:
            pts = critical_points(state, params, geom.radii)
            rows_clear.append([w.signed_distance(pt.position) for w in sc.walls for pt in pts])
        else:
            rows_clear.append([])
        if sc.case == CASE_WORKSPACE:
            rows_dev.append(float(np.linalg.norm(state.p_I - sc.workspace.center(p_ref))))
        else:
            rows_dev.append(np.nan)
        statuses.append(sol.solver_status)
        rows_time.append(sol.solve_time)

        if sol.solver_status == INFEASIBLE:
            # no usable plan; the row keeps nan disturbance since none applied
            rows_dist.append(np.full(3, np.nan))
            aborted = True
            break

        d_k = (sample_disturbance(rng, sc.disturbance.d_m)
               if sc.disturbance.active else np.zeros(3))
        rows_dist.append(d_k)
        irefs = refs_from_plan(sol.u_seq[0], sol.x_seq[1], state.Phi[2], params)
        for _ in range(sc.inner_substeps):
            thrust, tau_B, theta_ddot = inner.step(irefs, state)
            state, _ = integrate(
                params, state,
                PlantInputs(thrust=thrust, tau_B=tau_B, Theta_ddot=theta_ddot,
                            disturbance=d_k),
                sc.inner_dt,
            )
        warm = sol

    n = len(rows_t)
    clearances = (np.array(rows_clear) if clear_labels
                  else np.zeros((n, 0)))
    outcome, violation_step, abort_step = _derive_outcome(
        tuple(statuses), clearances, s_min, np.array(rows_dev), ws_r)
    log = EpisodeLog(
        t=np.array(rows_t),
        states=np.array(rows_x),
        inputs=np.array(rows_u),
        p_e=np.array(rows_pe),
        ref_p=np.array(rows_ref),
        barrier_labels=labels,
        barrier_h=np.array(rows_h).reshape(n, len(labels)),
        barrier_res=np.array(rows_res).reshape(n, len(labels)),
        clearance_labels=clear_labels,
        clearances=clearances,
        deviation=np.array(rows_dev),
        statuses=tuple(statuses),
        solve_times=np.array(rows_time),
        disturbances=np.array(rows_dist).reshape(n, 3),
        s_min=s_min,
        ws_r=ws_r,
        outcome=outcome,
        violation_step=violation_step,
        abort_step=abort_step if aborted else abort_step,
        scenario=sc,
        seed=seed,
    )
    return log, compute_metrics(log)


# ---------------------------------------------------------------------------
# benchmark and ablation drivers

@dataclass(frozen=True)
class BenchCell:
    """One slot of the variant/case/disturbance comparison grid."""

    variant: str
    case: str
    disturbed: bool

    @property
    def name(self) -> str:
        tag = "dist" if self.disturbed else "clean"
        return f"{self.case}-{tag}-{self.variant}"


def benchmark_suite() -> tuple:
    """Full 16-cell grid: every variant in both cases, with and without
    disturbance."""
    return tuple(
        BenchCell(variant=v, case=c, disturbed=d)
        for c in (CASE_WALLS, CASE_WORKSPACE)
        for d in (False, True)
        for v in VARIANTS
    )


def scenario_for_cell(cell: BenchCell, *, duration: float = 120.0,
                      d_m: float = 0.8, clearance: float = 0.5,
                      ws_radius: float = 0.1) -> Scenario:
    amp = d_m if cell.disturbed else 0.0
    if cell.case == CASE_WALLS:
        return case1_scenario(cell.variant, amp, clearance=clearance, duration=duration)
    return case2_scenario(cell.variant, amp, radius=ws_radius, duration=duration)


@dataclass
class BenchRow:
    cell: BenchCell
    seed: int
    metrics: Metrics
    outcome: str


@dataclass
class BenchmarkResult:
    """Per-seed rows plus helpers that aggregate them into the grid."""

    rows: list

    def cell_rows(self, cell: BenchCell) -> list:
        return [r for r in self.rows if r.cell == cell]

    def flag(self, cell: BenchCell) -> str:
        outcomes = [r.outcome for r in self.cell_rows(cell)]
        if any(o == OUTCOME_INFEASIBLE for o in outcomes):
            return "*"
        if any(o == OUTCOME_VIOLATED for o in outcomes):
            return "x"
        return "ok"

    def mean(self, cell: BenchCell, field_name: str) -> float:
        vals = [getattr(r.metrics, field_name) for r in self.cell_rows(cell)]
        return float(np.mean(vals)) if vals else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([
                "case", "disturbed", "variant", "seed", "outcome", "completed",
                "te", "c_e", "c_s", "min_clearance", "max_deviation",
                "mean_solve_time",
            ])
            for r in self.rows:
                m = r.metrics
                writer.writerow([
                    r.cell.case, int(r.cell.disturbed), r.cell.variant, r.seed,
                    r.outcome, int(m.completed), repr(m.te), repr(m.c_e),
                    repr(m.c_s), repr(m.min_clearance), repr(m.max_deviation),
                    repr(m.mean_solve_time),
                ])

    def table_text(self) -> str:
        cells = sorted({r.cell for r in self.rows},
                       key=lambda c: (c.case, c.disturbed, VARIANTS.index(c.variant)))
        lines = []
        header = f"{'cell':<34}{'flag':>6}{'TE':>10}{'c_e':>10}{'c_s':>10}{'solve':>10}"
        group = None
        for cell in cells:
            g = (cell.case, cell.disturbed)
            if g != group:
                group = g
                tag = "disturbed" if cell.disturbed else "no disturbance"
                lines.append(f"-- {cell.case}, {tag}")
                lines.append(header)
            lines.append(
                f"{cell.name:<34}{self.flag(cell):>6}"
                f"{self.mean(cell, 'te'):>10.4f}"
                f"{self.mean(cell, 'c_e'):>10.4f}"
                f"{self.mean(cell, 'c_s'):>10.4f}"
                f"{self.mean(cell, 'mean_solve_time'):>10.4f}"
            )
        return "\n".join(lines) + "\n"


def run_benchmark(cells=None, seeds=(0, 1, 2, 3, 4), *, out_dir=None,
                  factory=scenario_for_cell, progress=None) -> BenchmarkResult:
    """Run every (cell, seed) pair and aggregate the comparison grid.

    A single cell with a single seed reduces to one run_episode call on
    the factory's scenario.  `factory` exists so tests can shrink the
    episodes; `progress` gets one callback per finished episode.
    """
    if cells is None:
        cells = benchmark_suite()
    seeds = tuple(seeds)
    if not seeds:
        raise ConfigError("benchmark needs at least one seed per cell")
    rows = []
    for cell in cells:
        sc = factory(cell)
        for seed in seeds:
            log, metrics = run_episode(sc, seed)
            rows.append(BenchRow(cell=cell, seed=seed, metrics=metrics,
                                 outcome=log.outcome))
            if progress is not None:
                progress(cell, seed, metrics)
    result = BenchmarkResult(rows=rows)
    if out_dir is not None:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.to_csv(out / "benchmark.csv")
        (out / "benchmark.txt").write_text(result.table_text())
    return result


@dataclass
class AblationRow:
    horizon: int
    lam: float
    seed: int
    metrics: Metrics
    outcome: str


@dataclass
class AblationResult:
    """Horizon/resistivity sweep on the disturbed containment scenario."""

    rows: list

    def select(self, horizon: int, lam: float) -> list:
        return [r for r in self.rows if r.horizon == horizon and r.lam == lam]

    def mean(self, horizon: int, lam: float, field_name: str) -> float:
        vals = [getattr(r.metrics, field_name) for r in self.select(horizon, lam)]
        return float(np.mean(vals)) if vals else float("nan")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["horizon", "lambda", "seed", "outcome", "te",
                             "c_e", "c_s", "mean_solve_time"])
            for r in self.rows:
                m = r.metrics
                writer.writerow([r.horizon, repr(r.lam), r.seed, r.outcome,
                                 repr(m.te), repr(m.c_e), repr(m.c_s),
                                 repr(m.mean_solve_time)])

    def table_text(self) -> str:
        pairs = sorted({(r.horizon, r.lam) for r in self.rows})
        lines = [f"{'n':>4}{'lambda':>8}{'TE':>10}{'c_e':>10}{'c_s':>10}{'solve':>10}"]
        for n, lam in pairs:
            lines.append(
                f"{n:>4}{lam:>8.1f}"
                f"{self.mean(n, lam, 'te'):>10.4f}"
                f"{self.mean(n, lam, 'c_e'):>10.4f}"
                f"{self.mean(n, lam, 'c_s'):>10.4f}"
                f"{self.mean(n, lam, 'mean_solve_time'):>10.4f}"
            )
        return "\n".join(lines) + "\n"


def run_ablation(horizons=(1, 5, 10), lams=(1.0, 5.0), seeds=(0,), *,
                 base: Scenario | None = None, out_dir=None,
                 progress=None) -> AblationResult:
    """Sweep horizon length and barrier resistivity on one scenario."""
    if base is None:
        base = case2_scenario(VARIANT_BLF, 0.8)
    rows = []
    for lam in lams:
        for n in horizons:
            mpc = replace(base.mpc, n=int(n), barrier=replace(base.mpc.barrier, lam=float(lam)))
            sc = replace(base, mpc=mpc)
            for seed in seeds:
                log, metrics = run_episode(sc, seed)
                rows.append(AblationRow(horizon=int(n), lam=float(lam), seed=seed,
                                        metrics=metrics, outcome=log.outcome))
                if progress is not None:
                    progress(n, lam, seed, metrics)
    result = AblationResult(rows=rows)
    if out_dir is not None:
        import pathlib

        out = pathlib.Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.to_csv(out / "ablation.csv")
        (out / "ablation.txt").write_text(result.table_text())
    return result
