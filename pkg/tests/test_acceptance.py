"""End-to-end acceptance checks, one numbered test per criterion.

Run with -v for the per-criterion pass/fail lines.  The closed-loop
criteria replay full-length benchmark episodes and dominate the suite's
runtime, so every episode family is computed once in a session-scoped
fixture and shared between criteria.
"""

import dataclasses
import time

import numpy as np
import pytest

import amsim.mpc as mpc
from amsim.blf import (
    BarrierParams,
    h_wall,
    h_workspace,
    wall_barrier,
    workspace_barrier,
)
from amsim.config import default_config, scenario_from_config
from amsim.dynamics import AMParams, PlantInputs, PlantState, integrate, kinetic_energy
from amsim.errors import InfeasibleGeometry
from amsim.harness import case1_scenario, case2_scenario, run_episode
from amsim.kinematics import WallPlane, WorkspaceSphere
from oracles import arm_oracle
from test_dynamics import static_base_wrench

PARAMS = AMParams.default()

# the published benchmark figures are not reproducible bit for bit (the
# exact trajectory, wall layout, initial state, inner gains and bounds
# are not public), so the closed-loop criteria check the qualitative
# flag/ordering structure on this suite's own benchmark scenarios
CASE1_CLEARANCE = 0.25  # tight enough that unguarded variants graze walls
SEEDS = (0, 1, 2, 3, 4)
EPISODE_BUDGET_S = 600.0


def _run_set(make_scenario, seeds=SEEDS):
    out = []
    for seed in seeds:
        t0 = time.monotonic()
        log, met = run_episode(make_scenario(), seed=seed)
        out.append((log, met, time.monotonic() - t0))
    return out


@pytest.fixture(scope="session")
def c2_blf_runs():
    return _run_set(lambda: case2_scenario("BLF", d_m=0.8))


@pytest.fixture(scope="session")
def c2_naive_runs():
    return _run_set(lambda: case2_scenario("Naive", d_m=0.8))


@pytest.fixture(scope="session")
def c2_blf_n1_runs():
    def make():
        sc = case2_scenario("BLF", d_m=0.8)
        return dataclasses.replace(sc, mpc=dataclasses.replace(sc.mpc, n=1))

    return _run_set(make)


@pytest.fixture(scope="session")
def c1_blf_runs():
    return _run_set(lambda: case1_scenario("BLF", d_m=0.8, clearance=CASE1_CLEARANCE))


@pytest.fixture(scope="session")
def c1_baseline_runs():
    """Naive episodes, plus SC only if Naive never penetrates the margin."""
    runs = _run_set(lambda: case1_scenario("Naive", d_m=0.8, clearance=CASE1_CLEARANCE))
    if not any(log.outcome == "violated" for log, _, _ in runs):
        runs += _run_set(lambda: case1_scenario("SC", d_m=0.8, clearance=CASE1_CLEARANCE))
    return runs


def test_criterion_01_base_wrench_matches_lagrangian_oracle():
    t0 = time.monotonic()
    oracle = arm_oracle()
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        q = rng.uniform(-1.2, 1.2, 2)
        dq = rng.uniform(-3.0, 3.0, 2)
        ddq = rng.uniform(-10.0, 10.0, 2)
        ref = oracle(*q, *dq, *ddq, *PARAMS.l_links, *PARAMS.m_links,
                     *PARAMS.I_links, PARAMS.g_z)
        _, wrench, _ = static_base_wrench(q, dq, ddq)
        for got, want in ((wrench.force, ref["f_react"]),
                          (wrench.torque, ref["tau_react"])):
            want = np.asarray(want, float)
            scale = max(1.0, float(np.max(np.abs(want))))
            worst = max(worst, float(np.max(np.abs(got - want))) / scale)
    elapsed = time.monotonic() - t0
    assert worst < 1e-6
    assert elapsed < 5.0
    print(f"\n[criterion 1] PASS: wrench vs oracle, 100 states, "
          f"worst rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_kinetic_energy_conserved():
    par0 = dataclasses.replace(PARAMS, g_z=0.0)
    s = PlantState(
        p_I=np.zeros(3), v_I=np.array([0.3, -0.2, 0.4]),
        Phi=np.array([0.1, -0.2, 0.5]), omega_B=np.array([0.25, -0.15, 1.8]),
        Theta=np.array([0.7, -0.9]), Theta_dot=np.zeros(2),
    )
    e0 = kinetic_energy(par0, s)
    u = PlantInputs(thrust=0.0, tau_B=np.zeros(3), Theta_ddot=np.zeros(2))
    drift = 0.0
    for _ in range(10_000):  # 10 s at the inner step size
        s, _ = integrate(par0, s, u, 1e-3)
        drift = max(drift, abs(kinetic_energy(par0, s) - e0) / e0)
    assert drift < 1e-6
    print(f"\n[criterion 2] PASS: 10s rigid tumble, max KE drift {drift:.2e}")


def _cost_problem(rng, term):
    """Planner problem with exactly one cost term switched on."""
    variant = "SC" if term in ("l4", "l5") else "Naive"
    case = {"l4": "WallAvoidance", "l5": "WorkspaceBound"}.get(term, "Free")
    weights = {f"w{i}": 0.0 for i in range(1, 6)}
    weights.update({f"ws{i}": 0.0 for i in range(1, 6)})
    idx = term[1]
    weights[f"w{idx}"] = 2.0
    weights[f"ws{idx}"] = 7.0
    cfg = mpc.MpcConfig(n=3, variant=variant, w_u=0.0, **weights)
    geom = mpc.Geometry(
        case=case,
        walls=(WallPlane(normal_coeffs=(1, 0, 2), offset=1.4, s_min=0.1),)
        if case == "WallAvoidance" else (),
        workspace=WorkspaceSphere() if case == "WorkspaceBound" else None,
    )
    x0 = np.zeros(12)
    x0[0:3] = rng.uniform(-0.4, 0.4, 3) + [0, 0, 1.2]
    x0[3:6] = rng.uniform(-0.5, 0.5, 3)
    x0[6] = rng.uniform(-1, 1)
    x0[7] = rng.uniform(-0.5, 0.5)
    x0[8] = rng.uniform(-0.9, 0.9)
    x0[9] = rng.uniform(-1.2, 0.5)
    x0[10:12] = rng.uniform(-1, 1, 2)
    offset = np.array([0, 0, -0.225])
    p_d = np.tile(x0[0:3] + offset, (4, 1)) + rng.uniform(-0.05, 0.05, (4, 3))
    if term == "l5" and rng.uniform() < 0.5:
        # park the reference so the deviation penalty is actually active
        p_d = p_d + np.array([0.3, -0.2, 0.1])
    refs = mpc.ReferenceWindow(p_d=p_d, v_t=rng.uniform(-0.2, 0.2, (4, 3)))
    return cfg, geom, refs, x0


def test_criterion_03_gradients_match_central_differences():
    rng = np.random.default_rng(9)
    eps = 1e-6
    worst = 0.0
    for term in ("l1", "l2", "l3", "l4", "l5"):
        for _ in range(50):
            cfg, geom, refs, x0 = _cost_problem(rng, term)
            maps = mpc.PredictionMaps.build(cfg.T, cfg.n)
            ev = mpc._Evaluator(x0, maps, refs, cfg, geom, PARAMS)
            u = rng.uniform(-1, 1, 6 * cfg.n)
            grad = ev.full(u)["grad"]
            for k in range(u.size):
                up, um = u.copy(), u.copy()
                up[k] += eps
                um[k] -= eps
                fd = (ev.full(up)["f"] - ev.full(um)["f"]) / (2 * eps)
                err = abs(grad[k] - fd) / max(1.0, abs(fd))
                worst = max(worst, err)
                assert err < 1e-5, f"{term} input {k}"

    bp = BarrierParams()
    wall = WallPlane(normal_coeffs=(1.0, -0.5, 2.0), offset=1.6, s_min=0.1)
    ws = WorkspaceSphere()
    for _ in range(50):
        x = rng.uniform(-0.5, 0.5, 12)
        x[2] += 1.0
        pidx = int(rng.integers(3))
        got = wall_barrier(x, PARAMS, wall, pidx, bp).grad_x
        fd = np.zeros(12)
        for k in range(12):
            xp, xm = x.copy(), x.copy()
            xp[k] += eps
            xm[k] -= eps
            fd[k] = (wall_barrier(xp, PARAMS, wall, pidx, bp).h
                     - wall_barrier(xm, PARAMS, wall, pidx, bp).h) / (2 * eps)
        err = float(np.max(np.abs(got - fd) / np.maximum(1.0, np.abs(fd))))
        worst = max(worst, err)
        assert err < 1e-5, "wall barrier"

    count = 0
    while count < 50:
        x = np.zeros(12)
        p_d = rng.uniform(-0.3, 0.3, 3) + [0, 0, 1.0]
        v_t = rng.uniform(-0.3, 0.3, 3)
        dist = rng.uniform(0.01, 0.09)
        if abs(dist - bp.radial_floor) < 2e-3:
            continue  # normalization floor has a gradient kink by design
        dirn = rng.normal(size=3)
        dirn /= np.linalg.norm(dirn)
        x[0:3] = (p_d - ws.d_iw) + dist * dirn
        x[3:6] = rng.uniform(-0.5, 0.5, 3)
        side = "outward" if count % 2 == 0 else "inward"
        got = workspace_barrier(x, ws, p_d, v_t, bp, side).grad_x
        fd = np.zeros(12)
        for k in range(12):
            xp, xm = x.copy(), x.copy()
            xp[k] += eps
            xm[k] -= eps
            fd[k] = (workspace_barrier(xp, ws, p_d, v_t, bp, side).h
                     - workspace_barrier(xm, ws, p_d, v_t, bp, side).h) / (2 * eps)
        err = float(np.max(np.abs(got - fd) / np.maximum(1.0, np.abs(fd))))
        worst = max(worst, err)
        assert err < 1e-5, "workspace barrier"
        count += 1
    print(f"\n[criterion 3] PASS: cost terms l1-l5 and both barriers vs "
          f"central FD, 50 points each, worst rel err {worst:.2e}")


def test_criterion_04_barrier_sign_suite():
    rng = np.random.default_rng(14)
    for _ in range(500):
        alpha = rng.uniform(1.0, 300.0)
        bp = BarrierParams(alpha_max=alpha)
        s_min = rng.uniform(0.05, 0.5)
        gap = rng.uniform(1e-3, 2.0)
        dirn = rng.normal(size=3)
        dirn /= np.linalg.norm(dirn)
        tang = np.cross(dirn, rng.normal(size=3))
        s_vec = (s_min + gap) * dirn
        brake = np.sqrt(2.0 * alpha * gap)

        on = h_wall(s_vec, -brake * dirn + tang, bp, s_min)
        assert abs(on.h) < 1e-9
        f = rng.uniform(0.0, 0.999)
        inside = h_wall(s_vec, -f * brake * dirn + tang, bp, s_min)
        assert inside.h > 0.0
        with pytest.raises(InfeasibleGeometry):
            h_wall((s_min - 1e-6) * dirn, np.zeros(3), bp, s_min)

    for i in range(500):
        alpha = rng.uniform(1.0, 300.0)
        bp = BarrierParams(alpha_max=alpha)
        r = rng.uniform(0.05, 1.0)
        floor = min(bp.radial_floor, 0.5 * r)
        bp = dataclasses.replace(bp, radial_floor=floor)
        dist = rng.uniform(floor, r * 0.999)
        dirn = rng.normal(size=3)
        dirn /= np.linalg.norm(dirn)
        tang = np.cross(dirn, rng.normal(size=3))
        d_vec = dist * dirn
        side = "outward" if i % 2 == 0 else "inward"
        gap = (r - dist) if side == "outward" else (r + dist)
        brake = np.sqrt(2.0 * alpha * gap)
        # approach velocity pointing at the guarded piece of boundary
        toward = dirn if side == "outward" else -dirn

        on = h_workspace(d_vec, brake * toward + tang, bp, r, side)
        assert abs(on.h) < 1e-9
        f = rng.uniform(0.0, 0.999)
        inside = h_workspace(d_vec, f * brake * toward + tang, bp, r, side)
        assert inside.h > 0.0
        with pytest.raises(InfeasibleGeometry):
            h_workspace((r + 1e-6) * dirn, np.zeros(3), bp, r, side)
    print("\n[criterion 4] PASS: zero on the braking boundary, positive "
          "inside, domain error outside; 1000 geometries")


def test_criterion_05_closed_loop_invariance_residuals(c2_blf_runs):
    log, _, _ = c2_blf_runs[0]  # seed 0 is the default scenario's seed
    assert log.outcome == "completed"
    worst = float(np.nanmin(log.barrier_res))
    assert worst >= -1e-6
    print(f"\n[criterion 5] PASS: 120s disturbed containment episode, "
          f"{log.rows} accepted steps, worst residual {worst:.2e}")


def test_criterion_06_case2_flags(c2_blf_runs, c2_naive_runs):
    for log, met, wall in c2_blf_runs:
        assert log.outcome == "completed"
        assert np.all(log.deviation <= log.ws_r)
        assert wall <= EPISODE_BUDGET_S
    naive_violations = sum(
        log.outcome == "violated" for log, _, _ in c2_naive_runs
    )
    assert naive_violations >= 4
    worst_dev = max(m.max_deviation for _, m, _ in c2_blf_runs)
    slowest = max(w for _, _, w in c2_blf_runs)
    print(f"\n[criterion 6] PASS: guarded containment 5/5 (max deviation "
          f"{worst_dev:.4f} <= r=0.1), naive violated {naive_violations}/5, "
          f"slowest episode {slowest:.0f}s")


def test_criterion_07_case1_flags(c1_blf_runs, c1_baseline_runs):
    for log, met, _ in c1_blf_runs:
        assert log.outcome == "completed"
        assert float(np.min(log.clearances)) >= log.s_min
    penetrated = sum(log.outcome == "violated" for log, _, _ in c1_baseline_runs)
    assert penetrated >= 1
    worst_clear = min(m.min_clearance for _, m, _ in c1_blf_runs)
    base_clear = min(m.min_clearance for _, m, _ in c1_baseline_runs)
    print(f"\n[criterion 7] PASS: guarded clearance >= 0.1 in 5/5 (worst "
          f"{worst_clear:.4f}); baselines penetrated {penetrated} episode(s), "
          f"worst baseline clearance {base_clear:.4f}")


def test_criterion_08_horizon_ordering(c2_blf_runs, c2_blf_n1_runs):
    te_n5 = float(np.mean([m.te for _, m, _ in c2_blf_runs]))
    te_n1 = float(np.mean([m.te for _, m, _ in c2_blf_n1_runs]))
    assert te_n5 < te_n1

    # wall-clock cost is hardware-bound; only the n=10 vs n=5 ratio matters
    def probe(n):
        sc = case2_scenario("BLF", d_m=0.8, duration=15.0)
        sc = dataclasses.replace(sc, mpc=dataclasses.replace(sc.mpc, n=n))
        log, met = run_episode(sc, seed=0)
        return float(np.mean(log.solve_times))

    t5 = probe(5)
    t10 = probe(10)
    ratio = t10 / t5
    assert ratio >= 3.0
    print(f"\n[criterion 8] PASS: mean TE {te_n5:.4f} (n=5) < {te_n1:.4f} "
          f"(n=1); solve time {1e3 * t10:.0f}ms vs {1e3 * t5:.0f}ms, "
          f"ratio {ratio:.1f}x >= 3x")


def test_criterion_09_bitwise_determinism(tmp_path):
    blobs = []
    for i in (0, 1):
        cfg = default_config()
        cfg["scenario"]["duration"] = 10.0
        log, _ = run_episode(scenario_from_config(cfg), seed=0)
        path = tmp_path / f"run{i}.csv"
        log.to_csv(path)
        blobs.append(path.read_bytes())
    assert blobs[0] == blobs[1]
    print(f"\n[criterion 9] PASS: repeated run, identical CSV bytes "
          f"({len(blobs[0])} bytes)")


def test_criterion_10_discretization_exact():
    T = 0.1
    A, B = mpc.discretize(T)
    A_ref = np.eye(12)
    B_ref = np.zeros((12, 6))
    for pos, vel, uidx in ((0, 3, 0), (1, 4, 1), (2, 5, 2), (6, 7, 3),
                           (8, 10, 4), (9, 11, 5)):
        A_ref[pos, vel] = T
        B_ref[pos, uidx] = 0.5 * T * T
        B_ref[vel, uidx] = T
    np.testing.assert_allclose(A, A_ref, atol=1e-12)
    np.testing.assert_allclose(B, B_ref, atol=1e-12)

    rng = np.random.default_rng(3)
    n = 7
    x0 = rng.uniform(-1, 1, 12)
    us = rng.uniform(-2, 2, (n, 6))
    xs = mpc.predict(x0, us, mpc.PredictionMaps.build(T, n))
    for k in range(n + 1):
        want = np.zeros(12)
        for pos, vel, uidx in ((0, 3, 0), (1, 4, 1), (2, 5, 2), (6, 7, 3),
                               (8, 10, 4), (9, 11, 5)):
            p = x0[pos] + k * T * x0[vel]
            v = x0[vel]
            for j in range(k):
                p += T * T * (k - j - 0.5) * us[j, uidx]
                v += T * us[j, uidx]
            want[pos] = p
            want[vel] = v
        np.testing.assert_allclose(xs[k], want, atol=1e-12)
    print("\n[criterion 10] PASS: step matrices equal the closed form and "
          "7-step prediction equals the analytic rollout at 1e-12")
