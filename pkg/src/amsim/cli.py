"""Command-line front end: single episodes, benchmark grid, ablation sweep,
and the PID retuning utility.

Exit codes: 0 when the requested work completed, 1 on configuration
errors (including bad command lines), 2 when a single episode ended with
a safety violation, 3 when it aborted on an infeasible solve.
"""

import argparse
import sys

import numpy as np
import yaml

from amsim.config import (
    default_config_text,
    load_config,
    scenario_from_config,
)
from amsim.errors import AmsimError, ConfigError
from amsim.harness import (
    OUTCOME_COMPLETED,
    OUTCOME_INFEASIBLE,
    OUTCOME_VIOLATED,
    run_ablation,
    run_benchmark,
    run_episode,
    scenario_for_cell,
)
from amsim.inner_loop import tune_inner_gains
from amsim.mpc import CASES, VARIANTS

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_VIOLATED = 2
EXIT_INFEASIBLE = 3

_OUTCOME_EXIT = {
    OUTCOME_COMPLETED: EXIT_OK,
    OUTCOME_VIOLATED: EXIT_VIOLATED,
    OUTCOME_INFEASIBLE: EXIT_INFEASIBLE,
}


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is taken
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="amsim",
                description="Cascaded-MPC aerial manipulator simulation suite.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one closed-loop episode")
    run.add_argument("--config", metavar="FILE",
                     help="YAML overrides merged over the packaged defaults")
    run.add_argument("--variant", choices=VARIANTS,
                     help="controller variant override")
    run.add_argument("--case", choices=CASES, help="scenario case override")
    run.add_argument("--disturbance", type=float, metavar="D_M",
                     help="disturbance amplitude override [m/s^2]; 0 disables")
    run.add_argument("--seed", type=int, help="disturbance seed override")
    run.add_argument("--out", metavar="CSV", help="write the episode log here")

    bench = sub.add_parser("bench", help="run the variant/case comparison grid")
    bench.add_argument("--config", metavar="FILE")
    bench.add_argument("--seeds", type=_int_list, default=[0, 1, 2, 3, 4],
                       metavar="S0,S1,...")
    bench.add_argument("--out-dir", metavar="DIR",
                       help="write benchmark.csv and benchmark.txt here")

    abl = sub.add_parser("ablate", help="sweep horizon length and disturbance margin")
    abl.add_argument("--config", metavar="FILE")
    abl.add_argument("--horizons", type=_int_list, default=[1, 5, 10],
                     metavar="N0,N1,...")
    abl.add_argument("--lambdas", type=_float_list, default=[1.0, 5.0],
                     metavar="L0,L1,...")
    abl.add_argument("--seeds", type=_int_list, default=[0], metavar="S0,S1,...")
    abl.add_argument("--out-dir", metavar="DIR")

    tune = sub.add_parser("tune-pid", help="regenerate the inner-loop gains")
    tune.add_argument("--config", metavar="FILE")
    tune.add_argument("--out", metavar="FILE",
                      help="write the gains as a config fragment")
    tune.add_argument("--verbose", action="store_true",
                      help="print every candidate gain set")

    sub.add_parser("print-config", help="print the packaged default config")
    return p


def _apply_run_overrides(cfg: dict, args) -> dict:
    sc = cfg["scenario"]
    if args.variant is not None:
        sc["variant"] = args.variant
    if args.case is not None:
        sc["case"] = args.case
    if args.disturbance is not None:
        if args.disturbance < 0:
            raise ConfigError("disturbance amplitude must be nonnegative")
        sc["disturbance"]["kind"] = "uniform" if args.disturbance > 0 else "none"
        sc["disturbance"]["d_m"] = args.disturbance
    if args.seed is not None:
        sc["disturbance"]["seed"] = args.seed
    return cfg


def _fmt(v: float) -> str:
    return "n/a" if not np.isfinite(v) else f"{v:.4f}"


def _cmd_run(args) -> int:
    cfg = _apply_run_overrides(load_config(args.config), args)
    sc = scenario_from_config(cfg)
    log, met = run_episode(sc, seed=args.seed)
    print(f"case={sc.case} variant={sc.variant} seed={log.seed} "
          f"steps={log.rows}/{sc.steps}")
    print(f"outcome: {log.outcome}")
    print(f"TE={_fmt(met.te)}  c_e={_fmt(met.c_e)}  c_s={_fmt(met.c_s)}")
    if np.isfinite(met.min_clearance):
        print(f"min clearance: {met.min_clearance:.4f} m (margin {log.s_min} m)")
    if np.isfinite(met.max_deviation):
        print(f"max deviation: {met.max_deviation:.4f} m (radius {log.ws_r} m)")
    print(f"mean solve time: {1e3 * met.mean_solve_time:.1f} ms")
    if args.out:
        log.to_csv(args.out)
        print(f"episode log written to {args.out}")
    return _OUTCOME_EXIT[log.outcome]


def _bench_knobs(cfg: dict) -> dict:
    sc = cfg["scenario"]
    return dict(
        duration=float(sc["duration"]),
        d_m=float(sc["disturbance"]["d_m"]),
        clearance=float(sc["walls"]["clearance"]),
        ws_radius=float(sc["workspace"]["r"]),
    )


def _cmd_bench(args) -> int:
    knobs = _bench_knobs(load_config(args.config))

    def factory(cell):
        return scenario_for_cell(cell, **knobs)

    def progress(cell, seed, _met):
        print(f"done {cell.name} seed {seed}", file=sys.stderr)

    result = run_benchmark(factory=factory, seeds=args.seeds,
                           out_dir=args.out_dir, progress=progress)
    print(result.table_text(), end="")
    return EXIT_OK


def _cmd_ablate(args) -> int:
    cfg = load_config(args.config)
    base = scenario_from_config(cfg)

    def progress(n, lam, seed, _met):
        print(f"done n={n} lambda={lam} seed {seed}", file=sys.stderr)

    result = run_ablation(horizons=args.horizons, lams=args.lambdas,
                          seeds=args.seeds, base=base, out_dir=args.out_dir,
                          progress=progress)
    print(result.table_text(), end="")
    return EXIT_OK


def _cmd_tune_pid(args) -> int:
    cfg = load_config(args.config)
    sc = scenario_from_config(cfg)
    gains = tune_inner_gains(sc.params, verbose=args.verbose)
    doc = {"gains": {
        name: {
            "kp": g.kp, "ki": g.ki, "kd": g.kd, "i_limit": g.i_limit,
            **({"i_band": g.i_band} if np.isfinite(g.i_band) else {}),
        }
        for name, g in (("attitude", gains.attitude), ("yaw", gains.yaw),
                        ("height", gains.height), ("joint", gains.joint))
    }}
    text = yaml.safe_dump(doc, sort_keys=False)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"gains written to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "ablate":
            return _cmd_ablate(args)
        if args.command == "tune-pid":
            return _cmd_tune_pid(args)
        print(default_config_text(), end="")
        return EXIT_OK
    except ConfigError as exc:
        print(f"amsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AmsimError as exc:
        print(f"amsim: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
