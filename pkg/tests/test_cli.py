"""Command-line interface: argument handling, outputs, exit codes."""

import numpy as np
import pytest

from amsim.cli import main
from amsim.harness import EpisodeLog


def _write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def short_cfg(tmp_path):
    return _write(tmp_path / "short.yaml",
                  "scenario:\n  duration: 1.0\n  disturbance: {d_m: 0.4}\n")


class TestRun:
    def test_completed_episode_exits_zero(self, short_cfg, tmp_path, capsys):
        out = tmp_path / "ep.csv"
        code = main(["run", "--config", short_cfg, "--seed", "4",
                     "--out", str(out)])
        assert code == 0
        text = capsys.readouterr().out
        assert "outcome: completed" in text
        log = EpisodeLog.from_csv(out)
        assert log.rows == 10
        assert log.outcome == "completed"

    def test_violation_exits_two(self, tmp_path, capsys):
        # shrink the sphere so the naive planner is pushed out immediately
        cfg = _write(tmp_path / "v.yaml",
                     "scenario:\n"
                     "  duration: 2.0\n"
                     "  variant: Naive\n"
                     "  disturbance: {d_m: 0.8}\n"
                     "  workspace: {r: 0.02}\n")
        code = main(["run", "--config", cfg, "--seed", "0"])
        assert code == 2
        assert "outcome: violated" in capsys.readouterr().out

    def test_infeasible_exits_three(self, tmp_path, capsys):
        # fixed-state containment rows cannot absorb a disturbance kick
        cfg = _write(tmp_path / "i.yaml",
                     "scenario:\n"
                     "  duration: 2.0\n"
                     "  variant: HC\n"
                     "  disturbance: {d_m: 0.8}\n"
                     "  workspace: {r: 0.02}\n")
        code = main(["run", "--config", cfg, "--seed", "0"])
        assert code == 3
        assert "outcome: infeasible" in capsys.readouterr().out

    def test_overrides_reach_the_scenario(self, short_cfg, capsys):
        code = main(["run", "--config", short_cfg, "--variant", "Naive",
                     "--case", "Free", "--disturbance", "0"])
        assert code == 0
        text = capsys.readouterr().out
        assert "case=Free variant=Naive" in text

    def test_missing_config_exits_one(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "nope.yaml")])
        assert code == 1
        assert "config error" in capsys.readouterr().err

    def test_unknown_key_exits_one(self, tmp_path, capsys):
        cfg = _write(tmp_path / "bad.yaml", "mpc:\n  horizon: 7\n")
        assert main(["run", "--config", cfg]) == 1

    def test_bad_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["run", "--variant", "bogus"])
        assert exc.value.code == 1


class TestDrivers:
    def test_bench_single_cell_grid(self, tmp_path, capsys, monkeypatch):
        # shrink every episode the grid runs; the grid logic stays intact
        import amsim.cli as cli
        from amsim.harness import scenario_for_cell

        def tiny(cell, **kw):
            kw["duration"] = 0.5
            return scenario_for_cell(cell, **kw)

        monkeypatch.setattr(cli, "scenario_for_cell", tiny)
        out = tmp_path / "bench"
        code = main(["bench", "--seeds", "0", "--out-dir", str(out)])
        assert code == 0
        table = capsys.readouterr().out
        assert "WallAvoidance" in table and "WorkspaceBound" in table
        lines = (out / "benchmark.csv").read_text().splitlines()
        assert lines[0].startswith("case,disturbed,variant,seed")
        assert len(lines) == 1 + 16  # full grid, one seed

    def test_ablate_writes_table(self, tmp_path, capsys):
        cfg = _write(tmp_path / "a.yaml",
                     "scenario:\n  duration: 0.5\n  disturbance: {d_m: 0.4}\n")
        out = tmp_path / "abl"
        code = main(["ablate", "--config", cfg, "--horizons", "1,3",
                     "--lambdas", "5.0", "--seeds", "0", "--out-dir", str(out)])
        assert code == 0
        lines = (out / "ablation.csv").read_text().splitlines()
        assert lines[0] == "horizon,lambda,seed,outcome,te,c_e,c_s,mean_solve_time"
        assert len(lines) == 3
        assert "n" in capsys.readouterr().out

    def test_print_config_round_trips(self, capsys):
        import yaml

        from amsim.config import default_config

        assert main(["print-config"]) == 0
        printed = capsys.readouterr().out
        assert yaml.safe_load(printed) == default_config()


class TestTunePid:
    def test_writes_mergeable_fragment(self, tmp_path, capsys, monkeypatch):
        # the real sweep takes minutes; the command contract is what's tested
        import amsim.cli as cli
        from amsim.inner_loop import InnerGains

        monkeypatch.setattr(cli, "tune_inner_gains",
                            lambda params, verbose=False: InnerGains())
        out = tmp_path / "gains.yaml"
        assert main(["tune-pid", "--out", str(out)]) == 0
        from amsim.config import load_config, scenario_from_config

        sc = scenario_from_config(load_config(out))
        assert sc.gains == InnerGains()
