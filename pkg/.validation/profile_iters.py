"""Steady-state SQP iteration counts with a high iteration cap."""
import dataclasses

import numpy as np

from amsim.dynamics import PlantInputs, integrate
from amsim.harness import case2_scenario, initial_plant_state, reference_window, sample_disturbance
from amsim.inner_loop import InnerLoop, refs_from_plan
from amsim.mpc import PredictionMaps, project_outer, solve_step
from amsim.sqp import SqpOptions


def episode_iters(n, cap, seconds=6.0):
    sc = case2_scenario("BLF", 0.8, duration=120.0)
    sc = dataclasses.replace(
        sc, mpc=dataclasses.replace(sc.mpc, n=n, sqp=SqpOptions(max_iter=cap)))
    params = sc.params
    cfg = sc.planner_config
    geom = sc.geometry
    rng = np.random.default_rng(0)
    state = initial_plant_state(sc)
    inner = InnerLoop(params, sc.gains, dt=sc.inner_dt)
    maps = PredictionMaps.build(cfg.T, cfg.n)
    warm = None
    iters, times, statuses = [], [], []
    for k in range(int(seconds / sc.t_s)):
        t_k = k * sc.t_s
        x = project_outer(state)
        refs = reference_window(sc.trajectory, t_k, cfg.n, cfg.T)
        sol = solve_step(x, refs, cfg, geom, params, warm=warm, maps=maps)
        iters.append(sol.iterations)
        times.append(sol.solve_time)
        statuses.append(sol.solver_status)
        if sol.solver_status == "Infeasible":
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
    it = np.array(iters[10:])  # drop the start-up transient
    st = statuses[10:]
    from collections import Counter
    print(f"n={n:2d} cap={cap}: iters mean {it.mean():6.1f} median {np.median(it):5.0f} "
          f"p90 {np.percentile(it, 90):5.0f} max {it.max():4d}  "
          f"solve {1e3*np.mean(times[10:]):7.1f} ms  {Counter(st)}")
    return it.mean(), np.mean(times[10:])


i5, t5 = episode_iters(5, 400)
i10, t10 = episode_iters(10, 400)
print(f"iteration ratio {i10/i5:.2f}, time ratio {t10/t5:.2f}")
