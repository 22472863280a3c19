"""Safety barriers and the discrete forward-invariance residual.

Each barrier has the same shape: a braking-distance term
sqrt(2 * alpha_max * margin) measuring how much speed the platform could
shed before reaching the boundary, plus (or minus) the radial velocity
component.  The barrier is nonnegative exactly when the current approach
speed can still be braked away inside the remaining margin.

alpha_max here is the braking authority used to scale the safety margin,
a barrier tuning knob; it is deliberately a separate quantity from the
planner's per-axis input bound (AMParams.alpha_max).  With arm-scale
geometries (margins of a few centimeters) the barrier range must still sit
around the invariance offset `lam`, which forces a much larger scale than
the physical input box; see the default below.

The geometric entry points (h_point_obstacle, h_wall, h_workspace) enforce
their domains strictly and raise outside them.  The state-level wrappers
(wall_barrier, workspace_barrier) are what the optimizer differentiates:
below a small margin floor they switch to the C1 linear extension of the
square root so that infeasible rollouts produce finite, steeply negative
values instead of exceptions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from amsim.dynamics import AMParams
from amsim.errors import ConfigError, DegenerateCenter, InfeasibleGeometry
from amsim.kinematics import (
    OUTER_DIM,
    SL_P,
    SL_V,
    WallPlane,
    WorkspaceSphere,
    critical_points,
)

# below this margin (m) the solver-facing barriers go linear
_EXTENSION_MARGIN = 1e-4

_CENTER_EPS = 1e-9

# the braking boundary itself is in-domain (h = 0 there); only strictly
# outside raises, with a hair of float slack for norms of scaled unit vectors
_DOMAIN_EPS = 1e-12


@dataclass(frozen=True)
class BarrierParams:
    """Invariance-condition tuning: residual = dh/dt + gamma*(h^z - lam)."""

    gamma: float = 3.0
    z: float = 1.0
    lam: float = 5.0
    alpha_max: float = 250.0
    # floor on the normalization distance of the workspace radial-velocity
    # term; keeps the containment rows well posed when a passage crosses the
    # sphere center, where the radial direction flips sign.  Must sit below
    # the closed-loop riding margin lam**2 / (2 * alpha_max).
    radial_floor: float = 0.03

    def __post_init__(self):
        if self.gamma <= 0 or self.z <= 0 or self.lam < 0 or self.alpha_max <= 0:
            raise ConfigError("barrier parameters out of range")
        if self.radial_floor <= 0:
            raise ConfigError("radial_floor must be positive")


@dataclass
class BarrierValue:
    h: float
    grad_x: np.ndarray | None
    position_margin: float


def signed_power(h: float, z: float) -> float:
    """h**z extended to negative h as an odd function."""
    if z == 1.0:
        return h
    return float(np.sign(h) * np.abs(h) ** z)


def _braking(margin: float, alpha: float, extend: bool) -> tuple[float, float]:
    """sqrt(2*alpha*margin) and its margin-derivative, optionally extended
    linearly below the margin floor."""
    if extend and margin < _EXTENSION_MARGIN:
        s0 = np.sqrt(2.0 * alpha * _EXTENSION_MARGIN)
        slope = alpha / s0
        return s0 + slope * (margin - _EXTENSION_MARGIN), slope
    s = np.sqrt(2.0 * alpha * margin)
    return s, alpha / s if s > 0 else np.inf


def h_point_obstacle(p_vec, v, bp: BarrierParams, d_s: float) -> BarrierValue:
    """Barrier for keeping a point at range > d_s from a point obstacle."""
    p_vec = np.asarray(p_vec, float)
    dist = np.linalg.norm(p_vec)
    margin = dist - d_s
    if margin < -_DOMAIN_EPS:
        raise InfeasibleGeometry(f"range {dist:.4f} inside standoff {d_s:.4f}")
    s, _ = _braking(max(margin, 0.0), bp.alpha_max, extend=False)
    h = s + (p_vec / dist) @ np.asarray(v, float)
    return BarrierValue(h=float(h), grad_x=None, position_margin=float(margin))


def h_wall(s_vec, v, bp: BarrierParams, s_min: float) -> BarrierValue:
    """Barrier for keeping a critical point s_min clear of a wall plane."""
    s_vec = np.asarray(s_vec, float)
    dist = np.linalg.norm(s_vec)
    margin = dist - s_min
    if margin < -_DOMAIN_EPS:
        raise InfeasibleGeometry(f"clearance {dist:.4f} inside margin {s_min:.4f}")
    s, _ = _braking(max(margin, 0.0), bp.alpha_max, extend=False)
    h = s + (s_vec / dist) @ np.asarray(v, float)
    return BarrierValue(h=float(h), grad_x=None, position_margin=float(margin))


def h_workspace(
    d_vec, v_rel, bp: BarrierParams, r: float, side: str = "outward"
) -> BarrierValue:
    """Containment barrier pair for the workspace sphere.

    side="outward" guards the nearby piece of boundary (braking gap
    r - dist, outward speed counts against it); "inward" guards the
    antipodal piece a through-center passage would reach, so its braking
    gap is r + dist and inward speed counts against it.  Each family only
    tightens while its own boundary is being approached.
    """
    d_vec = np.asarray(d_vec, float)
    dist = np.linalg.norm(d_vec)
    margin = r - dist
    if margin < -_DOMAIN_EPS:
        raise InfeasibleGeometry(f"deviation {dist:.4f} outside radius {r:.4f}")
    if dist < _CENTER_EPS:
        raise DegenerateCenter("deviation direction undefined at the center")
    gap = margin if side == "outward" else r + dist
    s, _ = _braking(max(gap, 0.0), bp.alpha_max, extend=False)
    radial = (d_vec @ np.asarray(v_rel, float)) / max(dist, bp.radial_floor)
    h = s - radial if side == "outward" else s + radial
    return BarrierValue(h=float(h), grad_x=None, position_margin=float(margin))


def wall_barrier_from_point(pt, wall: WallPlane, bp: BarrierParams) -> BarrierValue:
    """Wall barrier for an already-evaluated critical point (with Jacobians)."""
    n = wall.normal_coeffs
    c = wall.signed_distance(pt.position)
    margin = c - wall.s_min
    s, ds = _braking(margin, bp.alpha_max, extend=True)
    h = s + n @ pt.velocity
    grad = ds * (n @ pt.jac_p) + n @ pt.jac_v
    return BarrierValue(h=float(h), grad_x=grad, position_margin=float(margin))


def wall_barrier(
    x: np.ndarray,
    params: AMParams,
    wall: WallPlane,
    point_index: int,
    bp: BarrierParams,
) -> BarrierValue:
    """Solver-facing wall barrier for one critical point of a planner state.

    Uses the signed plane distance, so a point pushed through the wall keeps
    getting worse instead of looking clear again.
    """
    pt = critical_points(np.asarray(x, float), params)[point_index]
    return wall_barrier_from_point(pt, wall, bp)


def workspace_barrier(
    x: np.ndarray,
    ws: WorkspaceSphere,
    p_d: np.ndarray,
    v_t: np.ndarray,
    bp: BarrierParams,
    side: str = "outward",
) -> BarrierValue:
    """Solver-facing containment barrier on the UAV center.

    Raises DegenerateCenter when the center offset cannot be normalized;
    the caller drops the constraint for that step.
    """
    x = np.asarray(x, float)
    d_vec = x[SL_P] - (np.asarray(p_d, float) - ws.d_iw)
    dist = np.linalg.norm(d_vec)
    if dist < _CENTER_EPS:
        raise DegenerateCenter("deviation direction undefined at the center")
    margin = ws.r - dist
    outward = side == "outward"
    gap = margin if outward else ws.r + dist
    s, ds = _braking(gap, bp.alpha_max, extend=True)
    dhat = d_vec / dist
    v_rel = x[SL_V] - np.asarray(v_t, float)
    rho = max(dist, bp.radial_floor)
    radial = (d_vec @ v_rel) / rho
    sign = -1.0 if outward else 1.0

    h = s + sign * radial
    grad = np.zeros(OUTER_DIM)
    # the near gap shrinks as the center moves outward, the far gap grows
    if dist >= bp.radial_floor:
        d_radial = (v_rel - radial * dhat) / dist
    else:
        d_radial = v_rel / rho
    grad[SL_P] = (-ds if outward else ds) * dhat + sign * d_radial
    grad[SL_V] = sign * d_vec / rho
    return BarrierValue(h=float(h), grad_x=grad, position_margin=float(margin))


def invariance_residual(h_now: float, h_next: float, bp: BarrierParams, T: float) -> float:
    """Discrete forward-invariance condition; safe iff the result is >= 0.

    The rate is a forward difference across consecutive predicted states;
    lam tightens the condition, creating margin against bounded disturbance.
    """
    if T <= 0:
        raise ConfigError("invariance residual needs a positive step time")
    return (h_next - h_now) / T + bp.gamma * (signed_power(h_now, bp.z) - bp.lam)


def analytic_invariance_point(p_vec, v, u, bp: BarrierParams, d_s: float) -> float:
    """Closed-form invariance expression for the point-obstacle barrier.

    Continuous-time counterpart of invariance_residual (with zero lam),
    scaled by the range; kept as a cross-check oracle for the forward
    difference.
    """
    p_vec = np.asarray(p_vec, float)
    v = np.asarray(v, float)
    u = np.asarray(u, float)
    dist = np.linalg.norm(p_vec)
    margin = dist - d_s
    if margin <= 0:
        raise InfeasibleGeometry(f"range {dist:.4f} inside standoff {d_s:.4f}")
    s = np.sqrt(2.0 * bp.alpha_max * margin)
    rhat = p_vec / dist
    rv = rhat @ v
    h = s + rv
    hdot = bp.alpha_max * rv / s + (v @ v - rv * rv) / dist + rhat @ u
    return float(dist * (hdot + bp.gamma * signed_power(h, bp.z)))
