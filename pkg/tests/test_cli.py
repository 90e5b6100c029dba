import csv
import json
import os

import numpy as np
import pytest

from rodwave.errors import ConfigurationError
from rodwave.cli import (
    EXIT_CONFIG,
    EXIT_INFEASIBLE,
    EXIT_OK,
    RunConfig,
    main,
    monotonicity_report,
    run_solve,
    run_sweep,
    validate_config,
)


class TestValidateConfig:
    def test_minimal_config_fills_defaults(self):
        cfg = validate_config('{"N": 4, "M": 4, "preset": "paper_example"}')
        assert cfg.P == 129
        assert cfg.solver == "both"
        assert cfg.oracle is False

    def test_zero_n_rejected_by_name(self):
        with pytest.raises(ConfigurationError) as err:
            validate_config('{"N": 0, "M": 2, "preset": "zero"}')
        assert any(msg.startswith("N:") for msg in err.value.messages)

    def test_m_equal_one_parses(self):
        # infeasibility is a run-time concern, not a parse-time one
        cfg = validate_config('{"N": 4, "M": 1, "preset": "paper_example"}')
        assert cfg.M == 1

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigurationError) as err:
            validate_config('{"N": 2, "M": 2, "preset": "zero", "bogus": 1}')
        assert any("bogus" in msg for msg in err.value.messages)

    def test_even_p_rejected(self):
        with pytest.raises(ConfigurationError) as err:
            validate_config('{"N": 2, "M": 2, "preset": "zero", "P": 10}')
        assert any(msg.startswith("P:") for msg in err.value.messages)

    def test_preset_and_profiles_conflict(self):
        with pytest.raises(ConfigurationError):
            validate_config('{"N": 2, "M": 2, "preset": "zero", '
                            '"profiles": {"v0": "x.csv"}}')


class TestRunSolve:
    def test_worked_example_artifacts(self, tmp_path):
        cfg = RunConfig(N=4, M=4, preset="paper_example",
                        out_dir=str(tmp_path), dump_matrices=True)
        assert run_solve(cfg) == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["T"] == pytest.approx(2.0)
        assert summary["lambda"] == pytest.approx(0.5)
        assert summary["counts"]["N_s"] == 12
        assert summary["terminal_errors"]["v1_sup"] <= 1e-8
        assert (tmp_path / "controls.csv").exists()
        assert (tmp_path / "fields.csv").exists()
        assert (tmp_path / "edge_C.csv").exists()
        assert (tmp_path / "parametrization_A.csv").exists()

    def test_zero_preset_zero_energy(self, tmp_path):
        cfg = RunConfig(N=2, M=2, preset="zero", P=17, out_dir=str(tmp_path))
        assert run_solve(cfg) == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert abs(summary["E"]) <= 1e-12

    def test_infeasible_exit_code(self, tmp_path):
        cfg = RunConfig(N=4, M=1, preset="paper_example", out_dir=str(tmp_path))
        assert run_solve(cfg) == EXIT_INFEASIBLE
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["feasible"] is False

    def test_reproducible_summary(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            cfg = RunConfig(N=3, M=2, preset="paper_example", P=33,
                            out_dir=str(out))
            assert run_solve(cfg) == EXIT_OK

        def canonical(path):
            data = json.loads((path / "summary.json").read_text())
            data.pop("timestamp")
            data["config"].pop("out_dir")
            return json.dumps(data, sort_keys=True)

        assert canonical(out1) == canonical(out2)

    def test_oracle_summary(self, tmp_path):
        cfg = RunConfig(N=2, M=2, preset="paper_example", P=65,
                        oracle=True, oracle_points_per_segment=64,
                        oracle_cfl=1.0, out_dir=str(tmp_path))
        assert run_solve(cfg) == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert "oracle" in summary
        assert "convergence_orders" in summary["oracle"]
        assert summary["oracle"]["terminal_energy_error"] < 0.1

    def test_profiles_from_csv(self, tmp_path):
        xs = np.linspace(-1, 1, 257)
        for name, vals in (("v0", np.cos(3 * xs)), ("p0", 3 * np.sin(3 * xs)),
                           ("v1", 0 * xs), ("p1", 0 * xs)):
            with open(tmp_path / f"{name}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                for x, v in zip(xs, vals):
                    writer.writerow([f"{x:.12g}", f"{v:.12g}"])
        cfg = validate_config(json.dumps({
            "N": 2, "M": 2, "P": 33,
            "profiles": {name: str(tmp_path / f"{name}.csv")
                         for name in ("v0", "p0", "v1", "p1")},
            "out_dir": str(tmp_path / "out")}))
        assert run_solve(cfg) == EXIT_OK
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["E"] > 0.1
        assert summary["terminal_errors"]["v1_sup"] <= 1e-6


class TestSweep:
    def test_small_sweep(self, tmp_path):
        cfg = RunConfig(N=2, M=2, preset="paper_example", P=33,
                        out_dir=str(tmp_path), solver="qp")
        assert run_sweep(cfg, (2, 3), (2, 3), workers=1) == EXIT_OK
        with open(tmp_path / "sweep.csv") as fh:
            lines = fh.read().splitlines()
        rows = [line.split(",") for line in lines[1:]
                if line and not line.startswith("#")]
        assert len(rows) == 4
        assert all(row[-1] == "ok" for row in rows)
        assert any("monotonicity" in line for line in lines)

    def test_monotonicity_report_flags_violations(self):
        rows = [{"M": 2, "N": 2, "TE": 1.0, "status": "ok"},
                {"M": 3, "N": 2, "TE": 1.5, "status": "ok"}]
        violations = monotonicity_report(rows)
        assert len(violations) == 1
        assert "axis M" in violations[0]


class TestMainEntry:
    def test_config_error_exit(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"N": 0}')
        assert main(["solve", "--config", str(bad)]) == EXIT_CONFIG

    def test_solve_via_main(self, tmp_path):
        cfgfile = tmp_path / "cfg.json"
        cfgfile.write_text(json.dumps({
            "N": 2, "M": 2, "preset": "paper_example", "P": 33,
            "out_dir": str(tmp_path / "out")}))
        assert main(["solve", "--config", str(cfgfile)]) == EXIT_OK

    def test_missing_config_file(self):
        assert main(["solve", "--config", "/nonexistent/cfg.json"]) == EXIT_CONFIG


class TestParallelSweep:
    def test_worker_pool_matches_serial(self, tmp_path):
        cfg = RunConfig(N=2, M=2, preset="paper_example", P=33,
                        out_dir=str(tmp_path / "par"), solver="qp")
        assert run_sweep(cfg, (2, 3), (2, 2), workers=2) == EXIT_OK
        cfg2 = RunConfig(N=2, M=2, preset="paper_example", P=33,
                         out_dir=str(tmp_path / "ser"), solver="qp")
        assert run_sweep(cfg2, (2, 3), (2, 2), workers=1) == EXIT_OK

        def table(path):
            with open(path / "sweep.csv") as fh:
                return [line.split(",")[:4] for line in fh.read().splitlines()[1:]
                        if line and not line.startswith("#")]

        assert table(tmp_path / "par") == table(tmp_path / "ser")


def test_dumped_parametrization_matrix_is_exact(tmp_path):
    from fractions import Fraction

    cfg = RunConfig(N=3, M=2, preset="paper_example", P=17,
                    out_dir=str(tmp_path), dump_matrices=True)
    assert run_solve(cfg) == EXIT_OK
    with open(tmp_path / "parametrization_A.csv") as fh:
        rows = [line.split(",") for line in fh.read().splitlines()]
    values = [Fraction(cell) for row in rows for cell in row]
    denominators = {v.denominator for v in values}
    assert all(d & (d - 1) == 0 for d in denominators)   # dyadic
    with open(tmp_path / "edge_C.csv") as fh:
        entries = {int(c) for line in fh.read().splitlines()
                   for c in line.split(",")}
    assert entries <= {-1, 0, 1}


def test_sweep_continues_past_failed_cells(tmp_path):
    # an infeasible cell is marked failed and the sweep keeps going
    cfg = RunConfig(N=2, M=2, preset="paper_example", P=33,
                    out_dir=str(tmp_path), solver="qp")
    code = run_sweep(cfg, (1, 2), (2, 2), workers=1)
    with open(tmp_path / "sweep.csv") as fh:
        lines = [l for l in fh.read().splitlines()[1:]
                 if l and not l.startswith("#")]
    statuses = [l.split(",")[-1] for l in lines]
    assert any(s.startswith("failed") for s in statuses)
    assert any(s == "ok" for s in statuses)
    assert code != EXIT_OK
