"""Dense SQP solver for small inequality-constrained problems.

Minimizes f(u) subject to g(u) >= 0 elementwise.  The caller supplies
callbacks returning values together with analytic derivatives:

    fun(u)  -> (f: float, grad: (n,))
    cons(u) -> (g: (m,), jac: (m, n))     m may be zero

Rows flagged soft are enforced through a fixed l1 exact penalty instead
of as hard constraints: wherever the hard problem is feasible the penalty
weight exceeds any multiplier and the solution is unchanged, and where it
is not the solver returns the least-violation plan rather than failing.
The Infeasible status classifies hard rows only.

Method: quadratic subproblems over a damped-BFGS model of the Lagrangian
Hessian, solved with cvxopt; an l1 exact-penalty merit line search; and an
elastic (slack) subproblem when the linearized constraints are themselves
inconsistent.  Everything is deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from cvxopt import matrix as _cvx
from cvxopt.solvers import qp as _cvx_qp

_QP_OPTS = {
    "show_progress": False,
    "abstol": 1e-9,
    "reltol": 1e-8,
    "feastol": 1e-9,
    "maxiters": 200,
}

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class SqpOptions:
    max_iter: int = 100
    tol: float = 1e-6
    ctol: float = 1e-6
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-6
    elastic_weight: float = 1e4
    # exact-penalty weight on soft rows; must dominate any constraint
    # multiplier or softness would distort feasible solutions
    soft_weight: float = 1e4


@dataclass
class SqpResult:
    u: np.ndarray
    f: float
    g: np.ndarray
    lam: np.ndarray
    status: str
    iterations: int
    kkt_residual: float
    # (merit before, merit after) per accepted step, at that step's penalty
    merit_history: list = field(default_factory=list)


def _solve_qp(B, grad, g, J):
    """Direction subproblem: min 1/2 d'Bd + grad'd  s.t.  g + Jd >= 0."""
    n = grad.size
    m = g.size
    P = _cvx(B)
    q = _cvx(grad.reshape(n, 1))
    if m == 0:
        sol = _cvx_qp(P, q, options=_QP_OPTS)
        if sol["status"] != "optimal":
            return None, None
        return np.array(sol["x"]).ravel(), np.zeros(0)
    G = _cvx(np.ascontiguousarray(-J))
    h = _cvx(g.reshape(m, 1))
    try:
        sol = _cvx_qp(P, q, G, h, options=_QP_OPTS)
    except (ValueError, ArithmeticError):
        return None, None
    if sol["status"] != "optimal":
        return None, None
    return np.array(sol["x"]).ravel(), np.maximum(np.array(sol["z"]).ravel(), 0.0)


def _solve_qp_soft(B, grad, g, J, soft, rho):
    """Direction subproblem with l1 slacks on the soft rows only.

    Rows keep their original order, so the returned multipliers align
    with g; soft-row duals are capped at rho by slack optimality.
    """
    n = grad.size
    m = g.size
    ms = int(soft.sum())
    P = np.zeros((n + ms, n + ms))
    P[:n, :n] = B
    P[n:, n:] = 1e-8 * np.eye(ms)
    q = np.concatenate([grad, rho * np.ones(ms)])
    sel = np.zeros((m, ms))
    sel[np.flatnonzero(soft), np.arange(ms)] = 1.0
    G = np.zeros((m + ms, n + ms))
    G[:m, :n] = -J
    G[:m, n:] = -sel
    G[m:, n:] = -np.eye(ms)
    h = np.concatenate([g, np.zeros(ms)])
    try:
        sol = _cvx_qp(
            _cvx(P), _cvx(q.reshape(-1, 1)), _cvx(G), _cvx(h.reshape(-1, 1)),
            options=_QP_OPTS,
        )
    except (ValueError, ArithmeticError):
        return None, None
    if sol["status"] != "optimal":
        return None, None
    x = np.array(sol["x"]).ravel()
    z = np.maximum(np.array(sol["z"]).ravel()[:m], 0.0)
    return x[:n], z


def _solve_elastic(B, grad, g, J, rho):
    """Slack-relaxed subproblem for inconsistent linearizations.

    min 1/2 d'Bd + grad'd + rho*sum(t)  s.t.  g + Jd + t >= 0, t >= 0.
    """
    n = grad.size
    m = g.size
    P = np.zeros((n + m, n + m))
    P[:n, :n] = B
    P[n:, n:] = 1e-8 * np.eye(m)
    q = np.concatenate([grad, rho * np.ones(m)])
    G = np.zeros((2 * m, n + m))
    G[:m, :n] = -J
    G[:m, n:] = -np.eye(m)
    G[m:, n:] = -np.eye(m)
    h = np.concatenate([g, np.zeros(m)])
    try:
        sol = _cvx_qp(
            _cvx(P), _cvx(q.reshape(-1, 1)), _cvx(G), _cvx(h.reshape(-1, 1)),
            options=_QP_OPTS,
        )
    except (ValueError, ArithmeticError):
        return None, None
    if sol["status"] not in ("optimal", "unknown"):
        return None, None
    x = np.array(sol["x"]).ravel()
    z = np.maximum(np.array(sol["z"]).ravel()[:m], 0.0)
    return x[:n], z


def _restore_feasibility(fun, cons, u, opt: SqpOptions, hard, iters: int = 8):
    """Least-norm Newton polish on the violated hard constraint rows.

    Warm-started stepping often ends an iteration budget hovering a hair
    outside the feasible set while riding active constraints; a couple of
    projection steps recover a strictly tolerable point.  Soft rows are
    left alone (their violation is priced, not forbidden), and rows whose
    Jacobian is zero (violations no input can influence) defeat the
    projection, so genuinely infeasible problems fall through unchanged.
    """
    u = np.asarray(u, float).copy()
    f, _ = fun(u)
    g, J = cons(u)
    g = np.asarray(g, float)
    J = np.asarray(J, float).reshape(g.size, u.size)

    def viol(gv):
        return float(np.maximum(0.0, -gv[hard]).max()) if hard.any() else 0.0

    target = 0.01 * opt.ctol
    for _ in range(iters):
        v = viol(g)
        if v <= target:
            break
        bad = (g < 0.0) & hard
        Jb = J[bad]
        if not np.any(np.abs(Jb) > 0.0):
            break
        d, *_ = np.linalg.lstsq(Jb, -g[bad], rcond=None)
        if not np.all(np.isfinite(d)) or float(np.abs(d).max()) < 1e-15:
            break
        alpha, improved = 1.0, False
        while alpha >= 0.125:
            u_t = u + alpha * d
            g_t, J_t = cons(u_t)
            g_t = np.asarray(g_t, float)
            if viol(g_t) < v:
                f, _ = fun(u_t)
                u, g = u_t, g_t
                J = np.asarray(J_t, float).reshape(g.size, u.size)
                improved = True
                break
            alpha *= 0.5
        if not improved:
            break
    if viol(g) <= opt.ctol:
        return u, f, g
    return None


def solve_sqp(fun, cons, u0, options: SqpOptions = SqpOptions(), soft=None) -> SqpResult:
    opt = options
    u = np.asarray(u0, dtype=float).copy()
    n = u.size

    f, grad = fun(u)
    g, J = cons(u)
    g = np.asarray(g, float)
    J = np.asarray(J, float).reshape(g.size, n)

    if soft is None:
        soft = np.zeros(g.size, bool)
    else:
        soft = np.asarray(soft, bool)
        if soft.shape != g.shape:
            raise ValueError("soft mask length must match the constraint count")
    hard = ~soft
    ms = int(soft.sum())
    rho = opt.soft_weight

    B = np.eye(n)
    first_update = True
    mu = 1.0
    lam = np.zeros(g.size)
    merit_history = []
    best_feasible = None  # (penalized objective, u, g)
    status = MAX_ITER
    kkt = np.inf
    it = 0

    def viol(gv):
        return float(np.maximum(0.0, -gv[hard]).max()) if hard.any() else 0.0

    def soft_sum(gv):
        return float(np.maximum(0.0, -gv[soft]).sum()) if ms else 0.0

    def merit(fv, gv):
        t = fv + rho * soft_sum(gv)
        if hard.any():
            t += mu * float(np.maximum(0.0, -gv[hard]).sum())
        return t

    for it in range(1, opt.max_iter + 1):
        if ms:
            d, lam_qp = _solve_qp_soft(B, grad, g, J, soft, rho)
        else:
            d, lam_qp = _solve_qp(B, grad, g, J)
        if d is None:
            d, lam_qp = _solve_elastic(B, grad, g, J, opt.elastic_weight)
        if d is None:
            # subproblem collapsed twice: regularize and retry once
            B = B + 1e-4 * np.eye(n)
            d, lam_qp = _solve_elastic(B, grad, g, J, opt.elastic_weight)
            if d is None:
                break
        lam = lam_qp

        kkt = float(np.abs(grad - (J.T @ lam if lam.size else 0.0)).max())
        v = viol(g)
        if v <= opt.ctol:
            pen_f = f + rho * soft_sum(g)
            if best_feasible is None or pen_f < best_feasible[0]:
                best_feasible = (pen_f, u.copy(), g.copy(), f)
        step = float(np.abs(d).max()) if d.size else 0.0

        if step <= opt.tol:
            # no direction left; classify by hard-row feasibility
            status = CONVERGED if v <= opt.ctol else INFEASIBLE
            break

        if lam.size and hard.any():
            mu = max(mu, 1.1 * float(np.abs(lam[hard]).max()))
        phi0 = merit(f, g)
        # directional upper bound on the merit derivative.  The QP zeroes
        # the linearized hard violation but may retain soft violation, so
        # the soft term credits only the decrease the step can deliver
        descent = float(grad @ d) + rho * (soft_sum(g + J @ d) - soft_sum(g))
        if hard.any():
            descent -= mu * float(np.maximum(0.0, -g[hard]).sum())

        alpha = 1.0
        accepted = False
        while alpha >= opt.min_step:
            u_t = u + alpha * d
            f_t, grad_t = fun(u_t)
            g_t, J_t = cons(u_t)
            g_t = np.asarray(g_t, float)
            J_t = np.asarray(J_t, float).reshape(g_t.size, n)
            phi_t = merit(f_t, g_t)
            if phi_t <= phi0 + opt.armijo * alpha * min(descent, 0.0):
                accepted = True
                break
            alpha *= opt.backtrack

        if not accepted:
            status = CONVERGED if v <= opt.ctol and kkt <= 1e-4 * (1 + abs(f)) else (
                INFEASIBLE if v > opt.ctol else MAX_ITER
            )
            break

        merit_history.append((phi0, phi_t))

        # damped BFGS on the Lagrangian gradient
        s = u_t - u
        gL_old = grad - (J.T @ lam if lam.size else 0.0)
        gL_new = grad_t - (J_t.T @ lam if lam.size else 0.0)
        y = gL_new - gL_old
        if first_update:
            sy = float(s @ y)
            if sy > 1e-12:
                B = B * (sy / float(s @ s))
            first_update = False
        Bs = B @ s
        sBs = float(s @ Bs)
        sy = float(s @ y)
        if sBs > 1e-14 and float(s @ s) > 1e-16:
            if sy < 0.2 * sBs:
                theta = 0.8 * sBs / (sBs - sy)
                y = theta * y + (1.0 - theta) * Bs
                sy = float(s @ y)
            if sy > 1e-14:
                B = B + np.outer(y, y) / sy - np.outer(Bs, Bs) / sBs
                B = 0.5 * (B + B.T)

        u, f, grad, g, J = u_t, f_t, grad_t, g_t, J_t
    else:
        it = opt.max_iter

    if status == MAX_ITER and best_feasible is not None:
        # hand back the best feasible iterate seen, not the last one
        pen_b, u_b, g_b, f_b = best_feasible
        if viol(g) > opt.ctol or pen_b < f + rho * soft_sum(g):
            u, f, g = u_b, f_b, g_b
    if viol(g) > 0.01 * opt.ctol:
        # polish any exit down to well inside the tolerance so accepted
        # solutions carry real headroom, and rescue budget-limited runs
        # that ended a hair outside the feasible set
        polished = _restore_feasibility(fun, cons, u, opt, hard)
        if polished is not None:
            u, f, g = polished
            if status == INFEASIBLE:
                status = MAX_ITER
    if status == MAX_ITER and viol(g) > opt.ctol:
        status = INFEASIBLE

    return SqpResult(
        u=u,
        f=f,
        g=g,
        lam=lam,
        status=status,
        iterations=it,
        kkt_residual=kkt,
        merit_history=merit_history,
    )
