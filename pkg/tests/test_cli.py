"""Event-file parsing, config dispatch, report round-trips, determinism."""

import json
import math

import numpy as np
import pytest

from sigcomp import scenarios as bench
from sigcomp.cli import main, read_events, run
from sigcomp.compensator import estimate_two_sample, score_geometry
from sigcomp.compensator import test_z1 as run_z1
from sigcomp.errors import (
    ConfigError,
    EmptyFile,
    ParseError,
    ValueOutsideRegion,
)

ENERGY_HI = math.log(35.0)


def write_events(path, values):
    path.write_text("".join(f"{float(v)!r}\n" for v in values), encoding="utf-8")
    return path


@pytest.fixture()
def line_files(tmp_path, line_background):
    truth = bench.line_truth(0.05)
    physics = truth.sample(400, 1001)
    background = line_background.sample(800, 1002)
    return (write_events(tmp_path / "physics.txt", physics),
            write_events(tmp_path / "background.txt", background))


def line_config(**extra):
    config = {
        "region": {"lo": 1.0, "hi": 2.0},
        "transform": "identity",
        "level": 0.05,
        "seed": 7,
        "signal": {"family": "truncated_gaussian",
                   "params": {"mu": 1.28, "sigma": 0.02}},
    }
    config.update(extra)
    return config


class TestReadEvents:
    def test_basic_parsing(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("1.0\n2.0\n# comment\n\n3.0\n", encoding="utf-8")
        assert np.array_equal(read_events(path), [1.0, 2.0, 3.0])

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("1.0\nabc\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            read_events(path)
        assert err.value.line == 2

    def test_log_transform(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("35\n1\n", encoding="utf-8")
        values = read_events(path, transform="log")
        assert values == pytest.approx([math.log(35.0), 0.0])

    def test_log_transform_rejects_nonpositive(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("1.0\n-2.0\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            read_events(path, transform="log")
        assert err.value.line == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "events.txt"
        path.write_text("# only comments\n\n", encoding="utf-8")
        with pytest.raises(EmptyFile):
            read_events(path)


class TestWithBackgroundMode:
    def test_fixed_proposal_matches_direct_api(self, tmp_path, line_files,
                                               line_signal, steep_power):
        physics_path, background_path = line_files
        config = line_config(mode="with_background",
                             proposal={"family": "pareto1", "params": {"slope": 4.0}})
        out = tmp_path / "out"
        code = run(config, physics_path, background_path, out_dir=out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        geo = score_geometry(line_signal, steep_power)
        est = estimate_two_sample(geo, read_events(physics_path),
                                  read_events(background_path))
        rep = run_z1(est, 0.05)
        assert report["results"]["method"] == "Z1"
        assert report["results"]["estimate"] == rep.estimate
        assert report["results"]["p_value"] == rep.p_value
        assert report["results"]["ci_lo"] == rep.ci_lo
        # config echo survives round-trip
        assert report["config"] == config

    def test_parametric_proposal_runs_z2(self, tmp_path, line_files):
        physics_path, background_path = line_files
        config = line_config(mode="with_background",
                             proposal={"family": "pareto1",
                                       "box": [[0.2, 15.0]], "init": [3.0]})
        out = tmp_path / "out"
        assert run(config, physics_path, background_path, out_dir=out) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["results"]["method"] == "Z2"
        assert "beta_hat" in report["results"]
        assert report["results"]["p_value_sci"].count("e") == 1

    def test_missing_background_is_config_error(self, tmp_path, line_files):
        physics_path, _ = line_files
        config = line_config(mode="with_background",
                             proposal={"family": "uniform"})
        with pytest.raises(ConfigError):
            run(config, physics_path, None, out_dir=tmp_path / "o")

    def test_value_outside_region_aborts(self, tmp_path, line_files):
        physics_path, background_path = line_files
        bad = write_events(tmp_path / "bad.txt", [1.5, 2.5])
        config = line_config(mode="with_background",
                             proposal={"family": "uniform"})
        with pytest.raises(ValueOutsideRegion):
            run(config, bad, background_path, out_dir=tmp_path / "o")


class TestNoBackgroundMode:
    def test_report_contains_alpha_and_lambda(self, tmp_path, line_files):
        physics_path, _ = line_files
        config = line_config(
            mode="no_background",
            no_background={
                "baseline": {"family": "pareto1", "box": [[0.2, 15.0]],
                             "init": [3.0]},
                "lambda": 0.03,
                "bump": {"mu1": 1.25, "mu2": 1.31, "sigma0": 0.08},
            })
        out = tmp_path / "out"
        assert run(config, physics_path, out_dir=out) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["results"]["method"] == "Z3"
        assert report["results"]["lambda"] == 0.03
        assert len(report["results"]["alpha_hat"]) == 1


class TestSensitivityMode:
    def test_writes_wide_curve_table_and_reports(self, tmp_path, line_files):
        physics_path, _ = line_files
        config = line_config(
            mode="sensitivity",
            sensitivity={
                "baseline": {"family": "pareto1", "box": [[0.2, 15.0]],
                             "init": [3.0]},
                "lambdas": [0.01, 0.02, 0.03],
                "bump": {"mu1": 1.25, "mu2": 1.31, "sigma0": 0.08},
                "grid_points": 17,
            })
        out = tmp_path / "out"
        assert run(config, physics_path, out_dir=out) == 0
        curves = (out / "sensitivity_curves.csv").read_text().splitlines()
        assert curves[0] == "x,lambda_0.01,lambda_0.02,lambda_0.03"
        assert len(curves) == 18
        reports = (out / "sensitivity_reports.csv").read_text().splitlines()
        assert reports[0] == "lambda,theta0_hat,std_error,statistic,p_value"
        assert len(reports) == 4
        payload = json.loads((out / "report.json").read_text())
        assert len(payload["results"]["reports"]) == 3


class TestLrtMode:
    def test_reports_constrained_fit(self, tmp_path, line_files):
        physics_path, _ = line_files
        config = line_config(
            mode="lrt",
            lrt={"proposal": {"family": "mixture",
                              "weights": [0.01, 0.99],
                              "components": [
                                  {"family": "truncated_gaussian",
                                   "params": {"mu": 1.28, "sigma": 0.02}},
                                  {"family": "pareto1", "params": {"slope": 4.0}},
                              ]}})
        out = tmp_path / "out"
        assert run(config, physics_path, out_dir=out) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["results"]["method"] == "LRT"
        assert report["results"]["statistic"] >= 0.0
        assert 0.0 <= report["results"]["p_value"] <= 0.5


class TestSimulateMode:
    def simulate_config(self, replicates=2):
        return line_config(
            mode="simulate",
            background={"family": "truncated_gamma",
                        "params": {"shape": 0.5, "rate": 3.3}},
            simulate={
                "keep_statistics": True,
                "scenarios": [{
                    "name": "null_z1",
                    "method": "Z1",
                    "proposal": {"family": "uniform"},
                    "eta": 0.0, "n": 60, "m": 120,
                    "replicates": replicates,
                }],
            })

    def test_grid_table_written(self, tmp_path):
        out = tmp_path / "out"
        assert run(self.simulate_config(4), out_dir=out, workers=1) == 0
        grid = (out / "mc_grid.csv").read_text().splitlines()
        assert grid[0].startswith("name,method,eta,n,m,lambda,replicates")
        assert grid[1].startswith("null_z1,Z1,")
        stats_file = out / "statistics_null_z1.txt"
        assert stats_file.exists()
        assert len(stats_file.read_text().splitlines()) == 4

    def test_byte_identical_reruns(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        config = self.simulate_config(2)
        assert run(config, out_dir=out_a, workers=1) == 0
        assert run(config, out_dir=out_b, workers=2) == 0
        for name in ("report.json", "mc_grid.csv", "statistics_null_z1.txt"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_report_roundtrip_precision(self, tmp_path):
        out = tmp_path / "out"
        run(self.simulate_config(2), out_dir=out, workers=1)
        report = json.loads((out / "report.json").read_text())
        rate = report["results"]["rows"][0]["rejection_rate"]
        assert rate == json.loads(json.dumps(rate))


class TestMain:
    def test_end_to_end_exit_codes(self, tmp_path, line_files):
        physics_path, background_path = line_files
        config = line_config(mode="with_background",
                             proposal={"family": "uniform"})
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        out = tmp_path / "cli_out"
        code = main(["--config", str(cfg_path), "--physics", str(physics_path),
                     "--background", str(background_path), "--out", str(out)])
        assert code == 0
        assert (out / "report.json").exists()

    def test_config_error_exit_code(self, tmp_path, line_files, capsys):
        physics_path, _ = line_files
        config = line_config(mode="nonsense")
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        code = main(["--config", str(cfg_path), "--physics", str(physics_path)])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["code"] == "ConfigError"

    def test_analysis_error_exit_code(self, tmp_path, capsys):
        bad = write_events(tmp_path / "bad.txt", [0.5])
        config = line_config(mode="with_background",
                             proposal={"family": "uniform"})
        cfg_path = tmp_path / "config.json"
        cfg_path.write_text(json.dumps(config), encoding="utf-8")
        code = main(["--config", str(cfg_path), "--physics", str(bad),
                     "--background", str(bad), "--out", str(tmp_path / "o")])
        assert code == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"]["code"] == "ValueOutsideRegion"

    def test_unreadable_config(self, tmp_path, capsys):
        code = main(["--config", str(tmp_path / "missing.json")])
        assert code == 2
        assert "ConfigError" in capsys.readouterr().err


class TestSeedOverride:
    def test_cli_seed_wins_over_config(self, tmp_path):
        config = line_config(
            mode="simulate",
            background={"family": "truncated_gamma",
                        "params": {"shape": 0.5, "rate": 3.3}},
            simulate={"scenarios": [{
                "name": "s", "method": "Z1",
                "proposal": {"family": "uniform"},
                "eta": 0.0, "n": 60, "m": 120, "replicates": 2}]})
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run(config, out_dir=out_a, seed=111)
        run(config, out_dir=out_b, seed=222)
        rep_a = json.loads((out_a / "report.json").read_text())
        rep_b = json.loads((out_b / "report.json").read_text())
        assert rep_a["inputs"]["seed"] == 111
        assert rep_b["inputs"]["seed"] == 222
        assert (rep_a["results"]["rows"][0]["mean_estimate"]
                != rep_b["results"]["rows"][0]["mean_estimate"])
