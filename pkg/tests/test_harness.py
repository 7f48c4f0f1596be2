"""Config grammar, CLI subcommands, serialization contracts, determinism."""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import feelsim.analytics as analytics_mod
from feelsim.analytics import NetworkConfig
from feelsim.checks import CHECK_COVERAGE, CheckRecord, run_all_checks
from feelsim.harness import (
    CSV_HEADER,
    ConfigError,
    ExperimentConfig,
    expand_sweep,
    load_config,
    main,
    run_trials,
    write_trials_csv,
)


def _write(tmp_path: Path, text: str) -> Path:
    p = tmp_path / "exp.ini"
    p.write_text(text)
    return p


SMALL_INI = """\
[network]
lambda_d = 5.0
M = 4
theta = 0.5
N = 6
S = 8

[run]
scheme = digital
mobility = high
n_sample_paths = 3
seed_base = 7
"""


class TestConfigGrammar:
    def test_defaults_from_empty_file(self, tmp_path):
        cfg = load_config(_write(tmp_path, ""))
        assert cfg.network.alpha == 4.0
        assert cfg.network.B == 1e6
        assert cfg.network.R == 1.0
        assert cfg.network.D_bits == 16
        assert cfg.n_sample_paths == 10
        assert cfg.scheme == "digital"
        assert cfg.task_kind == "quadratic"

    def test_defaults_from_no_file(self):
        cfg = load_config(None)
        assert cfg.network == NetworkConfig()

    def test_case_sensitive_keys(self, tmp_path):
        cfg = load_config(_write(tmp_path, "[network]\nM = 8\nR = 2.0\n"))
        assert cfg.network.M == 8
        assert cfg.network.R == 2.0

    def test_unknown_key_reports_full_path(self, tmp_path):
        with pytest.raises(ConfigError, match=r"network\.bandwidth"):
            load_config(_write(tmp_path, "[network]\nbandwidth = 5\n"))
        with pytest.raises(ConfigError, match=r"run\.fast"):
            load_config(_write(tmp_path, "[run]\nfast = yes\n"))
        with pytest.raises(ConfigError, match=r"task\.g_th"):
            load_config(_write(tmp_path, "[task]\ng_th = 1\n"))

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="antenna"):
            load_config(_write(tmp_path, "[antenna]\ngain = 3\n"))

    def test_domain_errors_surface(self, tmp_path):
        with pytest.raises(ConfigError, match="alpha"):
            load_config(_write(tmp_path, "[network]\nalpha = 2\n"))
        with pytest.raises(ConfigError, match=r"network\.M"):
            load_config(_write(tmp_path, "[network]\nM = four\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.ini")

    def test_boolean_parsing(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[network]\nfreeze_fading = true\n"
                                 "[run]\nrounds_to_target = off\n"))
        assert cfg.network.freeze_fading is True
        assert cfg.rounds_to_target is False
        with pytest.raises(ConfigError, match="freeze_fading"):
            load_config(_write(tmp_path, "[network]\nfreeze_fading = maybe\n"))

    def test_explicit_seed_list(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[run]\nseeds = 5, 9, 13\nn_sample_paths = 3\n"))
        assert cfg.resolved_seeds() == [5, 9, 13]

    def test_seed_base_expansion(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[run]\nseed_base = 100\nn_sample_paths = 4\n"))
        assert cfg.resolved_seeds() == [100, 101, 102, 103]

    def test_too_few_seeds_rejected(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[run]\nseeds = 1, 2\nn_sample_paths = 5\n"))
        with pytest.raises(ConfigError, match="seeds"):
            cfg.resolved_seeds()

    def test_task_kind_and_overrides(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[task]\nkind = logistic\nS = 4\n"
                                 "class_separation = 3.0\n"))
        assert cfg.task_kind == "logistic"
        assert cfg.task_params["S"] == 4
        assert cfg.task_params["class_separation"] == 3.0
        assert cfg.task_params["n_samples_per_device"] == 20  # default kept
        # an explicit task dimension pulls the payload size along with it
        assert cfg.network.S == 4

    def test_task_dimension_follows_network(self, tmp_path):
        cfg = load_config(_write(tmp_path, "[network]\nS = 12\n"))
        assert cfg.network.S == 12
        assert cfg.task_params["S"] == 12

    def test_task_dimension_defaults_match(self, tmp_path):
        cfg = load_config(_write(tmp_path, "[run]\nscheme = digital\n"))
        assert cfg.task_params["S"] == cfg.network.S

    def test_conflicting_dimensions_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match=r"task\.S.*network\.S"):
            load_config(_write(tmp_path,
                               "[network]\nS = 16\n[task]\nS = 8\n"))

    def test_matching_dimensions_accepted(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[network]\nS = 6\n[task]\nS = 6\n"))
        assert cfg.network.S == 6
        assert cfg.task_params["S"] == 6

    def test_task_param_must_belong_to_kind(self, tmp_path):
        # class_separation is not a quadratic-task parameter
        with pytest.raises(ConfigError, match="class_separation"):
            load_config(_write(tmp_path,
                               "[task]\nkind = quadratic\n"
                               "class_separation = 2.0\n"))

    def test_unknown_task_kind(self, tmp_path):
        with pytest.raises(ConfigError, match="kind"):
            load_config(_write(tmp_path, "[task]\nkind = resnet\n"))

    def test_bad_scheme_and_mobility(self, tmp_path):
        with pytest.raises(ConfigError, match="scheme"):
            load_config(_write(tmp_path, "[run]\nscheme = quantum\n"))
        with pytest.raises(ConfigError, match="mobility"):
            load_config(_write(tmp_path, "[run]\nmobility = medium\n"))


class TestSweepExpansion:
    def test_cartesian_points(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[sweep]\nparameter = theta\n"
                                 "values = 0.5, 1.0, 2.0\n"))
        points = expand_sweep(cfg)
        assert [v for v, _ in points] == [0.5, 1.0, 2.0]
        assert [p.network.theta for _, p in points] == [0.5, 1.0, 2.0]
        # the per-point configs carry no further sweep axis
        assert all(p.sweep_parameter is None for _, p in points)

    def test_integer_fields_cast(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[sweep]\nparameter = M\nvalues = 1, 2, 4\n"))
        points = expand_sweep(cfg)
        assert [p.network.M for _, p in points] == [1, 2, 4]
        assert all(isinstance(p.network.M, int) for _, p in points)

    def test_dimension_sweep_keeps_task_in_step(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[sweep]\nparameter = S\n"
                                 "values = 4, 8, 32\n"))
        points = expand_sweep(cfg)
        assert [p.network.S for _, p in points] == [4, 8, 32]
        assert [p.task_params["S"] for _, p in points] == [4, 8, 32]

    def test_incomplete_sweep_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="sweep"):
            load_config(_write(tmp_path, "[sweep]\nparameter = theta\n"))

    def test_non_network_parameter_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="parameter"):
            load_config(_write(tmp_path,
                               "[sweep]\nparameter = scheme\nvalues = 1\n"))

    def test_out_of_domain_value_rejected(self, tmp_path):
        cfg = load_config(_write(tmp_path,
                                 "[sweep]\nparameter = alpha\nvalues = 2, 4\n"))
        with pytest.raises(ConfigError, match="alpha"):
            expand_sweep(cfg)


class TestTrialsCsvContract:
    @pytest.fixture()
    def csv_lines(self, tmp_path):
        config = load_config(_write(tmp_path, SMALL_INI))
        results = run_trials(config)
        out = tmp_path / "trials.csv"
        write_trials_csv(out, results)
        return out.read_text().splitlines()

    def test_schema_comment_and_header(self, csv_lines):
        assert csv_lines[0] == "# feelsim-trials-v1"
        assert csv_lines[1] == CSV_HEADER
        assert CSV_HEADER.count(",") == 8  # nine pinned columns

    def test_rows_sorted_and_complete(self, csv_lines):
        rows = [line.split(",") for line in csv_lines[2:]]
        assert len(rows) == 3 * 6  # paths x rounds
        keys = [(int(r[0]), int(r[2])) for r in rows]
        assert keys == sorted(keys)
        assert all(len(r) == 9 for r in rows)
        assert {int(r[4]) for r in rows} <= {0, 1}

    def test_digital_interference_is_nan(self, csv_lines):
        rows = [line.split(",") for line in csv_lines[2:]]
        assert all(math.isnan(float(r[8])) for r in rows)

    def test_float_round_trip_17_digits(self, csv_lines):
        # 17 significant digits reproduce the binary64 values exactly
        rows = [line.split(",") for line in csv_lines[2:]]
        first = rows[0]
        loss = float(first[5])
        assert f"{loss:.17g}" == first[5]
        cum = float(first[7])
        assert f"{cum:.17g}" == first[7]

    def test_cumulative_latency_is_round_multiple(self, csv_lines):
        rows = [line.split(",") for line in csv_lines[2:]]
        per_round = float(rows[0][7])
        for r in rows:
            assert float(r[7]) == pytest.approx(per_round * int(r[2]),
                                                rel=1e-12)


class TestCliSubcommands:
    def test_analytic_writes_bound_report(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI)
        code = main(["analytic", "--config", str(ini),
                     "--out", str(tmp_path / "o")])
        assert code == 0
        payload = json.loads((tmp_path / "o" / "bounds.json").read_text())
        assert payload["schema"] == "feelsim-bounds-v1"
        assert payload["digital_bound"] > 0
        assert payload["latency"]["digital_high"]["feasible"] is True

    def test_simulate_writes_trials_and_summary(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI)
        code = main(["simulate", "--config", str(ini),
                     "--out", str(tmp_path / "o")])
        assert code == 0
        lines = (tmp_path / "o" / "trials.csv").read_text().splitlines()
        assert lines[0] == "# feelsim-trials-v1"
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["schema"] == "feelsim-summary-v1"
        assert summary["n_paths"] == 3
        assert summary["seeds"] == [7, 8, 9]

    def test_exit_one_on_config_error(self, tmp_path, capsys):
        ini = _write(tmp_path, "[network]\nwarp = 9\n")
        assert main(["simulate", "--config", str(ini)]) == 1
        assert "network.warp" in capsys.readouterr().err

    def test_exit_one_on_usage_error(self, tmp_path):
        assert main(["defragment"]) == 1

    def test_rounds_to_target_exit_codes(self, tmp_path):
        reachable = SMALL_INI + ("\nrounds_to_target = true\n"
                                 "max_rounds = 64\n")
        ini = _write(tmp_path, reachable.replace(
            "[network]", "[network]\nepsilon0 = 1000.0\ndelta = 0.2"))
        assert main(["simulate", "--config", str(ini),
                     "--out", str(tmp_path / "a")]) == 0
        summary = json.loads((tmp_path / "a" / "summary.json").read_text())
        assert summary["rounds_to_target"]["reached"] is True
        assert summary["rounds_to_target"]["rounds"] == 1

        hopeless = _write(tmp_path, reachable.replace(
            "[network]", "[network]\nepsilon0 = 1e-12\ndelta = 0.05"))
        assert main(["simulate", "--config", str(hopeless),
                     "--out", str(tmp_path / "b")]) == 3
        summary = json.loads((tmp_path / "b" / "summary.json").read_text())
        assert summary["rounds_to_target"]["reached"] is False

    def test_sweep_writes_per_point_summaries(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI +
                     "\n[sweep]\nparameter = theta\nvalues = 0.5, 2.0\n")
        assert main(["sweep", "--config", str(ini),
                     "--out", str(tmp_path / "o")]) == 0
        payload = json.loads((tmp_path / "o" / "sweep.json").read_text())
        assert payload["schema"] == "feelsim-sweep-v1"
        assert [p["value"] for p in payload["points"]] == [0.5, 2.0]
        assert all(p["summary"]["n_paths"] == 3 for p in payload["points"])

    def test_validate_exit_codes(self, tmp_path, monkeypatch):
        import feelsim.harness as harness_mod

        def fake_checks(cfg, seed_base=0, n_override=None):
            return [CheckRecord(name="stub", analytic=1.0, empirical=1.0,
                                tolerance=0.1, passed=True, n_samples=1,
                                detail="")]

        monkeypatch.setattr(harness_mod.checks, "run_all_checks", fake_checks)
        assert main(["validate", "--out", str(tmp_path / "ok")]) == 0
        payload = json.loads((tmp_path / "ok" / "validation.json").read_text())
        assert payload["schema"] == "feelsim-validation-v1"
        assert payload["all_passed"] is True

        def failing_checks(cfg, seed_base=0, n_override=None):
            return [CheckRecord(name="stub", analytic=1.0, empirical=9.0,
                                tolerance=0.1, passed=False, n_samples=1,
                                detail="off")]

        monkeypatch.setattr(harness_mod.checks, "run_all_checks",
                            failing_checks)
        assert main(["validate", "--out", str(tmp_path / "bad")]) == 2
        payload = json.loads((tmp_path / "bad" / "validation.json").read_text())
        assert payload["all_passed"] is False

    def test_mode_and_paths_overrides(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI)
        code = main(["simulate", "--config", str(ini),
                     "--out", str(tmp_path / "o"),
                     "--paths", "2", "--seed-base", "50",
                     "--mode", "cellular"])
        assert code == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["seeds"] == [50, 51]
        assert summary["config"]["interference_mode"] == "cellular"

    def test_json_is_strict(self, tmp_path):
        # NaN-valued summary fields must serialize as null, not bare NaN
        ini = _write(tmp_path, SMALL_INI.replace("lambda_d = 5.0",
                                                 "lambda_d = 0.001"))
        main(["simulate", "--config", str(ini), "--out", str(tmp_path / "o")])
        text = (tmp_path / "o" / "summary.json").read_text()
        json.loads(text)  # strict parser accepts it
        assert "NaN" not in text


class TestDeterminism:
    def test_byte_identical_rerun(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI)
        main(["simulate", "--config", str(ini), "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(ini), "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "trials.csv").read_bytes() == \
            (tmp_path / "b" / "trials.csv").read_bytes()
        assert (tmp_path / "a" / "summary.json").read_bytes() == \
            (tmp_path / "b" / "summary.json").read_bytes()

    def test_worker_pool_matches_serial(self, tmp_path, monkeypatch):
        config = load_config(_write(tmp_path, SMALL_INI))
        monkeypatch.delenv("FEELSIM_WORKERS", raising=False)
        serial = run_trials(config)
        monkeypatch.setenv("FEELSIM_WORKERS", "3")
        pooled = run_trials(config)
        assert len(serial) == len(pooled) == 3
        for (tid_a, rec_a), (tid_b, rec_b) in zip(serial, pooled):
            assert tid_a == tid_b
            assert rec_a.seed == rec_b.seed
            assert rec_a.final_loss == rec_b.final_loss
            assert [r.loss for r in rec_a.rounds] == \
                [r.loss for r in rec_b.rounds]

    def test_seed_change_changes_rows(self, tmp_path):
        ini = _write(tmp_path, SMALL_INI)
        main(["simulate", "--config", str(ini), "--out", str(tmp_path / "a")])
        main(["simulate", "--config", str(ini), "--out", str(tmp_path / "c"),
              "--seed-base", "99"])
        assert (tmp_path / "a" / "trials.csv").read_bytes() != \
            (tmp_path / "c" / "trials.csv").read_bytes()


class TestCheckRegistry:
    def test_coverage_table_spans_analytics_surface(self):
        public = {name for name, obj in vars(analytics_mod).items()
                  if callable(obj) and not isinstance(obj, type)
                  and not name.startswith("_")
                  and getattr(obj, "__module__", "") == "feelsim.analytics"}
        # the report builder only assembles quantities covered individually
        exempt = {"build_bound_report"}
        assert public - exempt == set(CHECK_COVERAGE), \
            "analytics surface and check-coverage table diverged"

    def test_coverage_names_resolve_and_pass_at_reduced_samples(self):
        records = run_all_checks(NetworkConfig(), seed_base=0, n_override=50)
        names = {rec.name for rec in records}
        assert len(names) == len(records), "duplicate check names"
        for op, check_names in CHECK_COVERAGE.items():
            missing = set(check_names) - names
            assert not missing, f"{op}: unknown checks {missing}"
        failed = [rec.name for rec in records if not rec.passed]
        assert not failed, f"registry failures at reduced samples: {failed}"


class TestConsoleEntryPoint:
    def test_installed_script_runs(self, tmp_path):
        out = subprocess.run(
            [sys.executable, "-m", "feelsim.harness", "analytic",
             "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert out.returncode == 0
        assert (tmp_path / "bounds.json").exists()
