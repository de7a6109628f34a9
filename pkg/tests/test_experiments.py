import json
import math
from pathlib import Path

import numpy as np
import pytest

from rabideco.cli import main as cli_main
from rabideco.experiments import (
    ConfigError,
    ExperimentKind,
    config_from_dict,
    emit_outputs,
    load_config,
    run_experiment,
    run_figure_experiment,
    run_gamma_ratio_experiment,
    run_oracle_check,
)

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def fig3_config(**overrides):
    data = {
        "experiment": "Fig3Indistinguishable",
        "system": {"omega": 1.0},
        "env": {"dt": 0.7, "beta": 0.995, "max_events": 5},
        "grid": {"t_max": 50.0, "n_points": 300},
        "output": {"prefix": "fig3"},
    }
    data.update(overrides)
    return data


def small_fig5_config(**overrides):
    data = {
        "experiment": "Fig5GammaRatio",
        "system": {"omega": 1.0},
        "env": {"beta": 0.99, "max_events": 2, "omega0_dt": 0.2},
        "ladder": {"n_max": 2},
        "fit_window": {"omega_t_span": 30.0, "n_points": 150},
        "output": {"prefix": "mini5"},
    }
    data.update(overrides)
    return data


class TestConfigParsing:
    @pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json")), ids=lambda p: p.name)
    def test_shipped_presets_load(self, path):
        cfg = load_config(path)
        assert isinstance(cfg.experiment, ExperimentKind)

    def test_unknown_top_level_key(self, tmp_path):
        data = fig3_config()
        data["grdi"] = {"t_max": 1.0}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(data, indent=2))
        with pytest.raises(ConfigError, match="grdi"):
            load_config(path)

    def test_unknown_nested_key_reports_line(self, tmp_path):
        data = fig3_config()
        data["env"]["etaa"] = 0.5
        path = tmp_path / "cfg.json"
        text = json.dumps(data, indent=2)
        path.write_text(text)
        with pytest.raises(ConfigError, match=r"env\.etaa \(line \d+\)"):
            load_config(path)

    def test_invalid_domain_value_fails_fast(self):
        data = fig3_config(env={"dt": 0.7, "beta": 1.5, "max_events": 5})
        with pytest.raises(ConfigError, match="beta"):
            config_from_dict(data)

    def test_missing_section(self):
        data = fig3_config()
        del data["grid"]
        with pytest.raises(ConfigError, match="grid"):
            config_from_dict(data)

    def test_wrong_type(self):
        data = fig3_config(system={"omega": "fast"})
        with pytest.raises(ConfigError, match="omega"):
            config_from_dict(data)

    def test_bad_json_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "experiment": "Fig3Indistinguishable",,\n}\n')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(path)

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="expected one of"):
            config_from_dict(fig3_config(experiment="Fig9"))

    def test_fig5_needs_exactly_one_time_scale(self):
        data = small_fig5_config(env={"beta": 0.99, "max_events": 2})
        with pytest.raises(ConfigError, match="omega0_dt"):
            config_from_dict(data)
        data = small_fig5_config(env={"beta": 0.99, "max_events": 2, "dt": 0.5, "omega0_dt": 0.2})
        with pytest.raises(ConfigError, match="omega0_dt"):
            config_from_dict(data)

    def test_fig5_master_eq_requires_rate(self):
        data = small_fig5_config(predictor="master-eq")
        with pytest.raises(ConfigError, match="gamma_se"):
            config_from_dict(data)

    @pytest.mark.parametrize(
        "patch,needle",
        [
            ({"grid": {"t_max": 50.0, "n_points": -1}}, "n_points"),
            ({"grid": {"t_max": float("nan"), "n_points": 10}}, "finite"),
            ({"system": {"omega": 0.0}}, "omega"),
            ({"fit": {"free_params": ["decay"]}}, "free_params"),
            ({"env": {"dt": -0.1, "beta": 0.5, "max_events": 5}}, "dt"),
            ({"output": {"prefix": "../escape"}}, "prefix"),
        ],
    )
    def test_validation_is_total(self, patch, needle):
        with pytest.raises(ConfigError, match=needle):
            config_from_dict(fig3_config(**patch))


class TestPipelines:
    def test_figure_experiment_fits(self):
        result = run_figure_experiment(config_from_dict(fig3_config()))
        assert result.fit is not None
        assert len(result.fit_curve) == len(result.series)

    def test_empty_grid_gives_empty_result(self):
        cfg = config_from_dict(fig3_config(grid={"t_max": 0.0, "n_points": 0}))
        result = run_figure_experiment(cfg)
        assert result.fit is None and len(result.series) == 0

    def test_gamma_ratio_rows(self):
        rows, power_law = run_gamma_ratio_experiment(config_from_dict(small_fig5_config()))
        assert [r.n for r in rows] == [0, 1, 2]
        assert rows[0].ratio == 1.0
        assert not power_law.degenerate
        assert all(r.gamma_n > 0.0 for r in rows)

    def test_gamma_ratio_single_level_degenerate(self):
        cfg = config_from_dict(small_fig5_config(ladder={"n_max": 0}))
        rows, power_law = run_gamma_ratio_experiment(cfg)
        assert [r.ratio for r in rows] == [1.0]
        assert power_law.degenerate

    def test_gamma_ratio_failure_names_level(self):
        # a window too narrow to fit trips the level-0 fit precondition
        cfg = config_from_dict(small_fig5_config(
            fit_window={"omega_t_span": 3.0, "n_points": 150}))
        with pytest.raises(RuntimeError, match="level n=0"):
            run_gamma_ratio_experiment(cfg)

    def test_gamma_ratio_master_eq_mode(self):
        cfg = config_from_dict(
            small_fig5_config(predictor="master-eq", master_eq={"gamma_se": 0.01})
        )
        rows, power_law = run_gamma_ratio_experiment(cfg)
        for row in rows:
            assert row.ratio == pytest.approx(1.0, abs=1e-3)
        assert power_law.exponent == pytest.approx(0.0, abs=0.01)

    def test_oracle_check_result(self):
        cfg = config_from_dict({
            "experiment": "OracleCrossCheck",
            "system": {"omega": 1.0},
            "env": {"dt": 0.2, "eta": 0.98},
            "grid": {"t_max": 8.0, "n_points": 17},
            "mc": {"n_systems": 20000},
            "seed": 5,
        })
        result = run_oracle_check(cfg)
        assert result.max_abs_z <= 5.0
        assert len(result.z_scores) == 17


class TestOutputs:
    def test_csv_structure(self, tmp_path):
        cfg = config_from_dict(fig3_config())
        paths = emit_outputs(run_experiment(cfg), cfg, tmp_path, ("csv",))
        lines = paths[0].read_text().splitlines()
        assert lines[0] == "t_coord,p_predicted,p_fit"
        assert len(lines) == 1 + 300

    def test_empty_series_header_only(self, tmp_path):
        cfg = config_from_dict(fig3_config(grid={"t_max": 0.0, "n_points": 0}))
        paths = emit_outputs(run_experiment(cfg), cfg, tmp_path, ("csv",))
        assert paths[0].read_text() == "t_coord,p_predicted,p_fit\n"

    def test_byte_identical_reruns(self, tmp_path):
        cfg = config_from_dict(fig3_config())
        a = emit_outputs(run_experiment(cfg), cfg, tmp_path / "a", ("csv", "json", "svg"))
        b = emit_outputs(run_experiment(cfg), cfg, tmp_path / "b", ("csv", "json", "svg"))
        for pa, pb in zip(a, b):
            assert pa.read_bytes() == pb.read_bytes()

    def test_json_round_trip_stable(self, tmp_path):
        cfg = config_from_dict(fig3_config())
        paths = emit_outputs(run_experiment(cfg), cfg, tmp_path, ("json",))
        text = paths[0].read_text()
        assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text

    def test_csv_values_round_trip(self, tmp_path):
        cfg = config_from_dict(fig3_config())
        result = run_experiment(cfg)
        paths = emit_outputs(result, cfg, tmp_path, ("csv",))
        rows = paths[0].read_text().splitlines()[1:]
        parsed = np.array([[float(v) for v in row.split(",")] for row in rows])
        np.testing.assert_array_equal(parsed[:, 1], result.series.probs)

    def test_target_verdict_in_summary(self, tmp_path):
        cfg = config_from_dict(fig3_config(target={"gamma_over_omega": 0.039, "tol": 0.005}))
        paths = emit_outputs(run_experiment(cfg), cfg, tmp_path, ("json",))
        summary = json.loads(paths[0].read_text())
        assert summary["pass"] is True
        assert summary["target"] == {"gamma_over_omega": 0.039, "tol": 0.005}

    def test_gamma_ratio_outputs(self, tmp_path):
        cfg = config_from_dict(small_fig5_config())
        paths = emit_outputs(run_experiment(cfg), cfg, tmp_path, ("csv", "json", "svg"))
        lines = paths[0].read_text().splitlines()
        assert lines[0] == "n,omega_n,gamma_n,ratio"
        assert len(lines) == 1 + 3
        summary = json.loads(paths[1].read_text())
        assert summary["rows"][0]["ratio"] == 1.0
        assert paths[2].read_text().startswith("<svg")

    def test_unknown_format_rejected(self, tmp_path):
        cfg = config_from_dict(fig3_config())
        with pytest.raises(ConfigError, match="format"):
            emit_outputs(run_experiment(cfg), cfg, tmp_path, ("pdf",))


class TestCli:
    def test_experiment_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(fig3_config()))
        code = cli_main(["experiment", "--config", str(cfg_path), "--out", str(tmp_path)])
        assert code == 0
        out_lines = capsys.readouterr().out.strip().splitlines()
        assert sorted(Path(p).name for p in out_lines) == ["fig3.csv", "fig3.json"]

    def test_simulate_command(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(fig3_config()))
        assert cli_main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path),
                         "--format", "csv"]) == 0
        lines = (tmp_path / "fig3.csv").read_text().splitlines()
        assert lines[0] == "t_coord,p_predicted"

    def test_simulate_rejects_gamma_ratio(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(small_fig5_config()))
        assert cli_main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2

    def test_config_error_exit_code(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(fig3_config(env={"dt": 0.7, "beta": 2.0})))
        assert cli_main(["experiment", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2

    def test_runtime_value_error_maps_to_numerical_exit(self, tmp_path):
        # validates as a config but the 5-point grid trips the fit preconditions
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(fig3_config(grid={"t_max": 50.0, "n_points": 5})))
        assert cli_main(["experiment", "--config", str(cfg_path), "--out", str(tmp_path)]) == 3

    def test_numerical_failure_exit_code(self, tmp_path):
        series = tmp_path / "series.csv"
        t = np.linspace(0.0, 30.0, 60)
        rows = ["t_coord,p"] + [f"{x},{'nan' if i == 10 else math.sin(x) ** 2}"
                                for i, x in enumerate(t)]
        series.write_text("\n".join(rows) + "\n")
        fit_cfg = tmp_path / "fit.json"
        fit_cfg.write_text(json.dumps({"series_csv": str(series), "omega_hint": 1.0}))
        assert cli_main(["fit", "--config", str(fit_cfg), "--out", str(tmp_path)]) == 3

    def test_fit_command_round_trip(self, tmp_path):
        t = np.linspace(0.0, 30.0, 300)
        y = 0.5 * (1.0 - np.exp(-0.05 * t) * np.cos(2.0 * t))
        series = tmp_path / "series.csv"
        series.write_text(
            "t_coord,p\n"
            + "\n".join(f"{float(a)!r},{float(b)!r}" for a, b in zip(t, y))
            + "\n"
        )
        fit_cfg = tmp_path / "fit.json"
        fit_cfg.write_text(json.dumps({"series_csv": "series.csv", "omega_hint": 1.0,
                                       "output": {"prefix": "refit"}}))
        assert cli_main(["fit", "--config", str(fit_cfg), "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "refit.json").read_text())
        assert summary["gamma"] == pytest.approx(0.05, abs=1e-6)

    def test_oracle_check_command(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "experiment": "OracleCrossCheck",
            "system": {"omega": 1.0},
            "env": {"dt": 0.2, "eta": 0.98},
            "grid": {"t_max": 6.0, "n_points": 13},
            "mc": {"n_systems": 10000},
            "seed": 3,
            "output": {"prefix": "oc"},
        }))
        assert cli_main(["oracle-check", "--config", str(cfg_path), "--out", str(tmp_path)]) == 0
        summary = json.loads((tmp_path / "oc.json").read_text())
        assert summary["pass"] is True

    def test_oracle_check_requires_matching_kind(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(fig3_config()))
        assert cli_main(["oracle-check", "--config", str(cfg_path), "--out", str(tmp_path)]) == 2

    def test_seed_override_changes_oracle(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({
            "experiment": "OracleCrossCheck",
            "system": {"omega": 1.0},
            "env": {"dt": 0.2, "eta": 0.9},
            "grid": {"t_max": 6.0, "n_points": 13},
            "mc": {"n_systems": 2000},
            "seed": 3,
            "output": {"prefix": "oc"},
        }))
        assert cli_main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "a"),
                         "--seed", "1"]) == 0
        assert cli_main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "b"),
                         "--seed", "2"]) == 0
        assert (tmp_path / "a" / "oc.csv").read_bytes() != (tmp_path / "b" / "oc.csv").read_bytes()
