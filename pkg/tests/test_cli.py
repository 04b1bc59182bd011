import json
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest

from main import main
from src.cli.commands import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    EXIT_SIMULATION,
    SWEEP_COLUMNS,
    RunSummary,
    SweepParameter,
    cmd_report,
    cmd_run,
    cmd_sweep,
    run_sweep,
    summarize,
)
from src.errors import ValidationError
from src.sim.closed_loop import run
from src.sim.trajectory import COLUMNS
from src.utils.exporter import read_summary
from src.utils.scenario_loader import load_scenario

DECOUPLED = "data/scenarios/decoupled.json"
BENCHMARK = "data/scenarios/benchmark.json"


class TestCmdRun:
    def test_writes_artifacts(self, tmp_path):
        code = cmd_run(DECOUPLED, str(tmp_path), t_final=2.0)
        assert code == EXIT_OK
        for name in ("trajectory.csv", "events_p1.csv", "events_p2.csv", "summary.json"):
            assert (tmp_path / name).exists()

        frame = pd.read_csv(tmp_path / "trajectory.csv")
        assert list(frame.columns) == COLUMNS
        assert len(frame) == 201

        summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
        events = pd.read_csv(tmp_path / "events_p1.csv")
        assert summary["event_counts"][0] == len(events)
        assert summary["stability"]["within_bound"] is True
        assert summary["nash_equilibrium"] == pytest.approx([1.0, 2.0])

    def test_decoupled_residual(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path)) == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
        assert summary["final_residual"] < 0.5

    def test_zero_horizon(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path), t_final=0.0) == EXIT_OK
        frame = pd.read_csv(tmp_path / "trajectory.csv")
        summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
        assert len(frame) == 1
        assert summary["min_gap"] == [None, None]
        assert summary["mean_gap"] == [None, None]

    def test_csv_keeps_full_precision(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path), t_final=0.5) == EXIT_OK
        frame = pd.read_csv(tmp_path / "trajectory.csv", float_precision="round_trip")
        traj = run(load_scenario(DECOUPLED).replace(t_final=0.5))
        np.testing.assert_array_equal(frame.to_numpy(), traj.samples.to_numpy())

    def test_summary_round_trips(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path), t_final=1.0) == EXIT_OK
        raw = read_summary(tmp_path / "summary.json")
        summary = RunSummary.from_dict(raw)
        assert json.loads(json.dumps(summary.to_dict())) == raw
        assert summary.scenario == "decoupled"

    def test_unwritable_out_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        assert cmd_run(DECOUPLED, str(blocker), t_final=0.1) == EXIT_IO

    def test_missing_scenario(self, tmp_path):
        assert cmd_run(str(tmp_path / "absent.json"), str(tmp_path)) == EXIT_IO

    def test_invalid_scenario(self, tmp_path, capsys):
        raw = json.loads(open(BENCHMARK, encoding="utf-8").read())
        raw["trigger"]["sigma"] = [1.5, 0.95]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        assert cmd_run(str(path), str(tmp_path / "out")) == EXIT_INVALID
        assert "trigger.sigma" in capsys.readouterr().err

    def test_diverging_run(self, tmp_path, capsys):
        assert cmd_run(BENCHMARK, str(tmp_path), t_final=1.0) == EXIT_SIMULATION
        assert "simulation failed" in capsys.readouterr().err

    def test_periodic_override(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path), mode="periodic", t_final=0.5) == EXIT_OK
        events = pd.read_csv(tmp_path / "events_p1.csv")
        assert len(events) == 501

    def test_html_report(self, tmp_path):
        assert cmd_run(DECOUPLED, str(tmp_path), t_final=2.0, html=True) == EXIT_OK
        html = (tmp_path / "report.html").read_text(encoding="utf-8")
        assert "decoupled" in html
        assert "<polyline" in html


class TestSummarize:
    def test_counts_match_logs(self, decoupled_config):
        traj = run(decoupled_config.replace(t_final=2.0))
        summary = summarize(traj)
        assert summary.event_counts == [len(traj.event_logs[0]), len(traj.event_logs[1])]
        assert summary.config_hash == decoupled_config.replace(t_final=2.0).config_hash()
        assert summary.stability is None
        assert summary.nash_payoff == pytest.approx([0.0, 0.0])


class TestSweep:
    def test_sigma_scale_monotone(self, decoupled_config):
        config = decoupled_config.replace(mode="average", t_final=10.0)
        result = run_sweep(config, SweepParameter.SIGMA_SCALE, [0.5, 1.0], max_workers=2)
        table = result.table
        assert result.failed == []
        assert list(table.columns) == SWEEP_COLUMNS
        assert list(table["value"]) == [0.5, 1.0]
        assert table.loc[1, "event_count_1"] <= table.loc[0, "event_count_1"]
        assert table.loc[1, "event_count_2"] <= table.loc[0, "event_count_2"]

    def test_omega_scale_rows(self, decoupled_config):
        config = decoupled_config.replace(t_final=1.0)
        table = run_sweep(config, SweepParameter.OMEGA_SCALE, [1, 2, 4]).table
        assert len(table) == 3
        assert list(table["value"]) == [1, 2, 4]

    def test_failed_run_becomes_nan_row(self, decoupled_config):
        config = decoupled_config.replace(t_final=0.5)
        result = run_sweep(config, SweepParameter.SIGMA_SCALE, [1.0, 3.0])
        table = result.table
        assert result.failed == [3.0]
        assert result.failure_count == 1
        assert not np.isnan(table.loc[0, "final_residual"])
        assert np.isnan(table.loc[1, "final_residual"])
        assert table.loc[1, "value"] == 3.0

    def test_cmd_sweep_failed_runs(self, tmp_path, capsys):
        code = cmd_sweep(BENCHMARK, "sigma_scale", [0.5, 1.0], str(tmp_path))
        assert code == EXIT_SIMULATION
        table = pd.read_csv(tmp_path / "sweep.csv")
        assert list(table["value"]) == [0.5, 1.0]
        assert table["final_residual"].isna().all()
        assert "2 of 2 sweep runs failed" in capsys.readouterr().err

    @patch('src.cli.commands._sweep_row')
    def test_cmd_sweep_partial_failure(self, mock_row, tmp_path):
        def row(config, parameter, value):
            if value > 1.0:
                raise RuntimeError("diverged")
            return {"value": value, "final_residual": 0.1, "event_count_1": 3,
                    "event_count_2": 4, "min_gap_1": 0.5, "min_gap_2": 0.25}

        mock_row.side_effect = row
        assert cmd_sweep(DECOUPLED, "omega_scale", [1.0, 2.0], str(tmp_path)) == EXIT_SIMULATION
        table = pd.read_csv(tmp_path / "sweep.csv")
        assert table.loc[0, "final_residual"] == pytest.approx(0.1)
        assert np.isnan(table.loc[1, "final_residual"])

    def test_empty_values(self, decoupled_config):
        with pytest.raises(ValidationError):
            run_sweep(decoupled_config, SweepParameter.SIGMA_SCALE, [])

    def test_cmd_sweep_empty_values(self, tmp_path):
        assert cmd_sweep(DECOUPLED, "sigma_scale", [], str(tmp_path)) == EXIT_INVALID

    @patch('src.cli.commands._sweep_row')
    def test_cmd_sweep_writes_table(self, mock_row, tmp_path):
        mock_row.side_effect = lambda config, parameter, value: {
            "value": value, "final_residual": 0.1 * value, "event_count_1": 3,
            "event_count_2": 4, "min_gap_1": 0.5, "min_gap_2": 0.25,
        }
        assert cmd_sweep(DECOUPLED, "omega_scale", [1.0, 2.0], str(tmp_path)) == EXIT_OK
        table = pd.read_csv(tmp_path / "sweep.csv")
        assert list(table.columns) == SWEEP_COLUMNS
        assert list(table["final_residual"]) == pytest.approx([0.1, 0.2])
        assert mock_row.call_count == 2


class TestCmdReport:
    def test_prints_json(self, capsys):
        assert cmd_report(BENCHMARK) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["within_bound"] is True
        assert report["hk_norm"] == pytest.approx(29.422, abs=1e-3)

    def test_bad_q_scale(self):
        assert cmd_report(BENCHMARK, q_scale=-1.0) == EXIT_INVALID


class TestMain:
    def test_run_verb(self, tmp_path, capsys):
        code = main(["run", DECOUPLED, "--out", str(tmp_path), "--t-final", "0.5", "--mode", "average"])
        assert code == EXIT_OK
        summary = json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))
        assert summary["mode"] == "average"
        assert "Done!" in capsys.readouterr().out

    def test_sweep_verb(self, tmp_path):
        code = main(["sweep", DECOUPLED, "--param", "sigma_scale", "--values", "0.5,1.0",
                     "--out", str(tmp_path)])
        assert code == EXIT_OK
        assert len(pd.read_csv(tmp_path / "sweep.csv")) == 2

    def test_bad_values(self, tmp_path):
        code = main(["sweep", DECOUPLED, "--param", "sigma_scale", "--values", "a,b", "--out", str(tmp_path)])
        assert code == EXIT_INVALID

    def test_report_verb(self, capsys):
        assert main(["report", DECOUPLED]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["alpha"] == pytest.approx(2.0)
