"""Full-length validation sweep; writes one summary line per episode."""
import json, time, sys
import numpy as np
from amsim.harness import case1_scenario, case2_scenario, run_episode
from dataclasses import replace
from amsim.sqp import SqpOptions

OUT = "/root/pkg/.validation/results.jsonl"

def log_row(**kw):
    with open(OUT, "a") as f:
        f.write(json.dumps(kw) + "\n")
    print(kw, flush=True)

def run(tag, sc, seed):
    t0 = time.perf_counter()
    log, met = run_episode(sc, seed=seed)
    wall = time.perf_counter() - t0
    res = log.barrier_res[np.isfinite(log.barrier_res)]
    log_row(tag=tag, seed=seed, outcome=log.outcome, rows=len(log.t),
            worst_res=float(res.min()) if res.size else None,
            te=met.te, c_e=met.c_e, c_s=met.c_s,
            min_clear=None if np.isnan(met.min_clearance) else met.min_clearance,
            max_dev=None if np.isnan(met.max_deviation) else met.max_deviation,
            solve_ms=met.mean_solve_time * 1e3, wall_s=wall)

# criterion 5 + 6: Case II 120 s
for seed in range(5):
    run("c2_blf", case2_scenario("BLF", d_m=0.8, duration=120.0), seed)
for seed in range(5):
    run("c2_naive", case2_scenario("Naive", d_m=0.8, duration=120.0), seed)

# criterion 7: Case I 120 s at clearance 0.25
for seed in range(5):
    run("c1_blf", case1_scenario("BLF", d_m=0.8, clearance=0.25, duration=120.0), seed)
for seed in range(5):
    run("c1_naive", case1_scenario("Naive", d_m=0.8, clearance=0.25, duration=120.0), seed)
for seed in range(5):
    run("c1_sc", case1_scenario("SC", d_m=0.8, clearance=0.25, duration=120.0), seed)

# criterion 8: n=1 TE over 5 seeds (n=5 TEs reused from c2_blf)
for seed in range(5):
    base = case2_scenario("BLF", d_m=0.8, duration=120.0)
    sc = replace(base, mpc=replace(base.mpc, n=1))
    run("c2_blf_n1", sc, seed)

# criterion 8 timing: n=5 vs n=10 on 15 s episodes
for n in (5, 10):
    base = case2_scenario("BLF", d_m=0.8, duration=15.0)
    sc = replace(base, mpc=replace(base.mpc, n=n))
    run(f"time_n{n}", sc, 0)

print("BATCH DONE", flush=True)
