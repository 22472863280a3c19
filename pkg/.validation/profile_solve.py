"""Break a containment solve into evaluator vs QP time at two horizons."""
import dataclasses
import time

import numpy as np

import amsim.sqp as sqp_mod
from amsim.dynamics import PlantInputs, integrate
from amsim.harness import case2_scenario, initial_plant_state, reference_window, sample_disturbance
from amsim.inner_loop import InnerLoop, refs_from_plan
from amsim.mpc import PredictionMaps, _Evaluator, project_outer, solve_step


def episode_profile(n, seconds=8.0):
    sc = case2_scenario("BLF", 0.8, duration=120.0)
    sc = dataclasses.replace(sc, mpc=dataclasses.replace(sc.mpc, n=n))
    params = sc.params
    cfg = sc.planner_config
    geom = sc.geometry
    rng = np.random.default_rng(0)
    state = initial_plant_state(sc)
    inner = InnerLoop(params, sc.gains, dt=sc.inner_dt)
    maps = PredictionMaps.build(cfg.T, cfg.n)
    warm = None

    qp_time = [0.0]
    qp_calls = [0]
    orig_qp = sqp_mod._cvx_qp

    def timed_qp(*a, **k):
        t0 = time.perf_counter()
        out = orig_qp(*a, **k)
        qp_time[0] += time.perf_counter() - t0
        qp_calls[0] += 1
        return out

    sqp_mod._cvx_qp = timed_qp
    try:
        solve_times, iters = [], []
        steps = int(seconds / sc.t_s)
        for k in range(steps):
            t_k = k * sc.t_s
            x = project_outer(state)
            refs = reference_window(sc.trajectory, t_k, cfg.n, cfg.T)
            sol = solve_step(x, refs, cfg, geom, params, warm=warm, maps=maps)
            solve_times.append(sol.solve_time)
            iters.append(sol.iterations)
            if sol.solver_status == "Infeasible":
                print(f"  n={n}: infeasible at step {k}")
                break
            d_k = sample_disturbance(rng, sc.disturbance.d_m)
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
    finally:
        sqp_mod._cvx_qp = orig_qp

    total = sum(solve_times)
    print(f"n={n:2d}: {len(solve_times)} solves, mean {1e3*np.mean(solve_times):7.2f} ms, "
          f"mean iters {np.mean(iters):5.2f}")
    print(f"      qp: {qp_calls[0]} calls, {1e3*qp_time[0]/max(1,len(solve_times)):7.2f} ms/solve "
          f"({100*qp_time[0]/total:4.1f}% of solve time)")

    # single-point breakdown: evaluator call cost
    x = project_outer(state)
    refs = reference_window(sc.trajectory, 0.0, cfg.n, cfg.T)
    ev = _Evaluator(x, maps, refs, cfg, geom, params)
    u = np.zeros(6 * n)
    ev.full(u)  # warm numpy
    reps = 50
    t0 = time.perf_counter()
    for i in range(reps):
        ev.full(u + 1e-9 * i)  # defeat the cache
    dt = (time.perf_counter() - t0) / reps
    print(f"      evaluator full(): {1e3*dt:6.2f} ms/call")
    return np.mean(solve_times)


m5 = episode_profile(5)
m10 = episode_profile(10)
print(f"ratio: {m10/m5:.2f}")
