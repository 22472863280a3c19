"""Replicate the n=1 containment run and dump the failing solve."""
import dataclasses
import numpy as np

from amsim.dynamics import PlantInputs, integrate
from amsim.harness import (
    case2_scenario, initial_plant_state, reference_window, sample_disturbance,
)
from amsim.inner_loop import InnerLoop, refs_from_plan
from amsim.mpc import PredictionMaps, project_outer, solve_step


def run_until_infeasible(seed):
    sc = case2_scenario("BLF", 0.8, duration=120.0)
    sc = dataclasses.replace(sc, mpc=dataclasses.replace(sc.mpc, n=1))
    params = sc.params
    cfg = sc.planner_config
    geom = sc.geometry
    rng = np.random.default_rng(seed)
    state = initial_plant_state(sc)
    inner = InnerLoop(params, sc.gains, dt=sc.inner_dt)
    maps = PredictionMaps.build(cfg.T, cfg.n)
    warm = None
    for k in range(sc.steps):
        t_k = k * sc.t_s
        x = project_outer(state)
        refs = reference_window(sc.trajectory, t_k, cfg.n, cfg.T)
        sol = solve_step(x, refs, cfg, geom, params, warm=warm, maps=maps)
        if sol.solver_status == "Infeasible":
            print(f"seed {seed}: infeasible at step {k} (t={t_k:.1f}s), "
                  f"iters={sol.iterations}")
            print(f"    p={x[0:3]} v={x[3:6]}")
            print(f"    psi={x[6]:+.4f} dpsi={x[7]:+.4f}")
            print(f"    th=({x[8]:+.4f},{x[9]:+.4f}) dth=({x[10]:+.4f},{x[11]:+.4f})")
            print(f"    th1 limit {cfg.joint1_max:.4f}  th1+th2={x[8]+x[9]:+.4f} "
                  f"limit {cfg.joint_sum_max:.4f}")
            print(f"    |v| = {np.linalg.norm(x[3:6]):.4f}  (v_max {cfg.v_max})")
            dev = x[0:3] - (refs.p_d[0] - geom.workspace.d_iw)
            print(f"    |d| = {np.linalg.norm(dev):.4f}  (r={geom.workspace.r})")
            for label, sl in sol.residual_groups.items():
                res = sol.constraint_residuals[sl]
                if res.size:
                    print(f"    group {label:12s} min residual {res.min():+.6e}")
            return
        d_k = (sample_disturbance(rng, sc.disturbance.d_m)
               if sc.disturbance.active else np.zeros(3))
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
    print(f"seed {seed}: completed all {sc.steps} steps")


for s in (0, 1):
    run_until_infeasible(s)
