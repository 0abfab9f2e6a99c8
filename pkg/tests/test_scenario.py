"""
시나리오 파이프라인, 스윕, CLI 테스트
"""

import json

import pandas as pd
import pytest

from app.cli import main
from app.core.exceptions import ConfigError, NumericalError, OutputPathError, SweepPartialFailure
from app.schemas.params import SystemParams
from app.schemas.scenario import build_config, parse_config
from app.services.scenario_service import ScenarioService
from app.services.output_writer import OutputWriter
from app.services.sweep_service import AGGREGATE_FILE, UNEXPECTED_ERROR_CODE, SweepService, expand_points, run_point


def read_bytes(directory, name):
    return (directory / name).read_bytes()


class TestConfig:
    def test_empty_document_uses_defaults(self):
        cfg = parse_config("{}")
        assert cfg.params == SystemParams()
        assert cfg.target_j == 1
        assert cfg.params.eta == pytest.approx(0.1)
        assert cfg.outputs == ["populations", "metrics", "selectivity"]

    def test_negative_gamma(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"params": {"gamma_p": -1}}')
        assert "params.gamma_p" in info.value.message
        assert "γ_p ≥ 0" in info.value.message

    def test_omega_from_eta(self):
        cfg = parse_config('{"params": {"omega_m": 3.3333333}}')
        assert cfg.params.eta == pytest.approx(0.3, abs=1e-7)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as info:
            parse_config('{"paramz": 1}')
        assert "paramz" in info.value.message

    def test_malformed_json(self):
        with pytest.raises(ConfigError):
            parse_config('{"params": ')

    def test_empty_outputs(self):
        with pytest.raises(ConfigError):
            build_config({"outputs": []})

    def test_reversed_bracket(self):
        with pytest.raises(ConfigError):
            build_config({"bracket": [-9.2, -9.9]})

    def test_truncation_below_target(self):
        with pytest.raises(ConfigError):
            build_config({"target_j": 2, "n_c": 3})
        with pytest.raises(ConfigError):
            build_config({"target_j": 2, "validation": {"n_c": 3}})

    def test_outputs_deduplicated(self):
        assert build_config({"outputs": ["metrics", "metrics", "wigner"]}).outputs == ["metrics", "wigner"]

    def test_exit_code(self):
        with pytest.raises(ConfigError) as info:
            build_config({"params": {"kappa_b": 0}})
        assert info.value.exit_code == 2


class TestScenarioService:
    def test_default_run(self, tmp_path):
        manifest = ScenarioService().run_scenario(parse_config("{}"), tmp_path)
        names = {f.name for f in manifest.files}
        assert names == {"populations.csv", "metrics.json", "selectivity.json"}
        assert (tmp_path / "manifest.json").exists()
        metrics = json.loads((tmp_path / "metrics.json").read_text(encoding="utf-8"))
        assert set(metrics["conventions"]) == {"derived", "literal"}
        for values in metrics["conventions"].values():
            assert {"g2", "delta_fock", "nbar", "omega_j"} <= set(values)
        assert metrics["reference"]["g2_reference"] == 0.51

    def test_populations_format(self, tmp_path):
        ScenarioService().run_scenario(build_config({"outputs": ["populations"]}), tmp_path)
        raw = read_bytes(tmp_path, "populations.csv")
        assert raw.startswith(b"n,p_n\r\n")
        frame = pd.read_csv(tmp_path / "populations.csv")
        assert frame["p_n"].sum() == pytest.approx(1.0, abs=1e-10)
        assert list(frame["n"]) == list(range(len(frame)))

    def test_deterministic(self, tmp_path):
        cfg = parse_config("{}")
        first, second = tmp_path / "a", tmp_path / "b"
        ScenarioService().run_scenario(cfg, first)
        ScenarioService().run_scenario(cfg, second)
        for name in ("populations.csv", "metrics.json", "selectivity.json"):
            assert read_bytes(first, name) == read_bytes(second, name)

    def test_wigner_grid_rows(self, tmp_path):
        ScenarioService().run_scenario(build_config({"outputs": ["wigner"]}), tmp_path)
        frame = pd.read_csv(tmp_path / "wigner.csv")
        assert list(frame.columns) == ["x", "y", "w"]
        assert len(frame) == 201 * 201
        assert frame["w"].min() > -1e-10
        assert frame["x"].iloc[0] == -4.0 and frame["y"].iloc[1] > frame["y"].iloc[0]

    def test_solve_mode_uses_root(self, tmp_path):
        cfg = build_config({"detuning_mode": "solve", "outputs": ["metrics", "selectivity"]})
        outcome = ScenarioService().execute(cfg, tmp_path)
        assert outcome.metrics.delta_a == outcome.selectivity.delta_a_root
        assert outcome.metrics.detuning_mode == "solve"

    def test_fixed_mode_tolerates_missing_root(self, tmp_path):
        cfg = build_config({"bracket": [-9.5, -9.2], "outputs": ["selectivity"]})
        outcome = ScenarioService().execute(cfg, tmp_path)
        assert not outcome.selectivity.root_found
        assert outcome.selectivity.audited_delta_a == -9.7

    def test_solve_mode_failure_removes_outputs(self, tmp_path):
        cfg = build_config({"detuning_mode": "solve", "bracket": [-9.5, -9.2]})
        out_dir = tmp_path / "run"
        with pytest.raises(NumericalError):
            ScenarioService().run_scenario(cfg, out_dir)
        assert not out_dir.exists()

    def test_failure_after_partial_write(self, tmp_path, monkeypatch):
        def broken_metrics(self, cfg, params):
            raise NumericalError("forced failure")

        monkeypatch.setattr(ScenarioService, "metrics", broken_metrics)
        out_dir = tmp_path / "run"
        with pytest.raises(NumericalError) as info:
            ScenarioService().run_scenario(build_config({"outputs": ["populations", "metrics"]}), out_dir)
        assert info.value.details["scenario"]["target_j"] == 1
        assert not out_dir.exists()

    def test_full_model_validation(self, tmp_path):
        cfg = build_config(
            {"outputs": ["full_model_validation"], "validation": {"n_c": 6, "gamma_p": 1e-3, "delta_a": -9.7}}
        )
        ScenarioService().run_scenario(cfg, tmp_path)
        report = json.loads((tmp_path / "validation.json").read_text(encoding="utf-8"))
        assert report["n_c"] == 6
        assert len(report["phonon_populations"]) == 6
        assert report["reconstruction_note"]

    def test_manifest_digests(self, tmp_path):
        import hashlib

        manifest = ScenarioService().run_scenario(build_config({"outputs": ["metrics"]}), tmp_path)
        entry = manifest.files[0]
        assert entry.sha256 == hashlib.sha256(read_bytes(tmp_path, entry.name)).hexdigest()
        assert set(manifest.alpha_values) == {"derived", "literal"}


class TestSweep:
    def test_grid_order(self):
        cfg = build_config({"sweep": {"eta": [0.1, 0.3], "j": [1, 2]}})
        points = expand_points(cfg)
        assert [(p["eta"], p["j"]) for p in points] == [(0.1, 1), (0.1, 2), (0.3, 1), (0.3, 2)]
        assert [p["config"]["params"]["delta_a"] for p in points] == [-9.7, -9.6, -7.5, -6.6]
        assert points[0]["label"] == "eta_0.1_j_1"

    def test_grid_run(self, tmp_path):
        cfg = build_config({"outputs": ["metrics"], "sweep": {"eta": [0.1, 0.3], "j": [1, 2]}})
        manifest = SweepService().sweep(cfg, tmp_path, parallel=1)
        frame = pd.read_csv(tmp_path / AGGREGATE_FILE)
        assert len(frame) == 4
        assert list(frame["status"]) == ["ok"] * 4
        assert list(frame["delta_a"]) == [-9.7, -9.6, -7.5, -6.6]
        assert {"g2_derived", "delta_fock_literal"} <= set(frame.columns)
        assert (tmp_path / "eta_0.1_j_2" / "metrics.json").exists()
        assert all(point.success for point in manifest.points)
        assert set(manifest.reference_summary) == {"derived", "literal"}

        assert list(frame["g2_literal"]) == pytest.approx([0.465, 0.77, 0.062, 0.70], abs=0.01)
        assert list(frame["delta_fock_literal"]) == pytest.approx([0.237, 0.245, 0.236, 0.246], abs=0.002)
        assert (frame["g2_derived"] > 1.0).all()
        assert manifest.reference_summary["derived"]["g2_below_one"] is False
        assert manifest.reference_summary["literal"]["delta_increases_with_eta"] is False

    def test_partial_failure(self, tmp_path):
        cfg = build_config(
            {
                "outputs": ["metrics"],
                "sweep": {"eta": [0.1, 0.3], "j": [1], "points": [{"target_j": 2}, {"params": {"gamma_p": -1}}]},
            }
        )
        with pytest.raises(SweepPartialFailure) as info:
            SweepService().sweep(cfg, tmp_path, parallel=1)
        assert info.value.exit_code == 4
        assert info.value.details["failed"] == ["point_003"]
        frame = pd.read_csv(tmp_path / AGGREGATE_FILE, keep_default_na=False)
        assert list(frame["status"]) == ["ok", "ok", "ok", "error"]
        assert frame["error_code"].iloc[3] == "CONFIG_ERROR"
        assert (tmp_path / "manifest.json").exists()

    def test_single_point_matches_scenario(self, tmp_path):
        cfg = build_config({"outputs": ["metrics"]})
        ScenarioService().run_scenario(cfg, tmp_path / "single")
        SweepService().sweep(cfg, tmp_path / "sweep", parallel=1)
        assert read_bytes(tmp_path / "single", "metrics.json") == read_bytes(tmp_path / "sweep" / "point_000", "metrics.json")

    def test_parallel_matches_serial(self, tmp_path):
        cfg = build_config({"outputs": ["metrics"], "sweep": {"eta": [0.1, 0.3], "j": [1]}})
        SweepService().sweep(cfg, tmp_path / "serial", parallel=1)
        SweepService().sweep(cfg, tmp_path / "parallel", parallel=2)
        assert read_bytes(tmp_path / "serial", AGGREGATE_FILE) == read_bytes(tmp_path / "parallel", AGGREGATE_FILE)


class TestCli:
    def test_metrics_command(self, tmp_path, capsys):
        assert main(["metrics", "--out", str(tmp_path)]) == 0
        status = json.loads(capsys.readouterr().out)
        assert status["success"] is True
        assert status["command"] == "metrics"
        assert "metrics.json" in status["files"]
        assert not (tmp_path / "populations.csv").exists()

    def test_alpha_convention_override(self, tmp_path):
        assert main(["steady-state", "--out", str(tmp_path), "--alpha-convention", "literal"]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["params"]["alpha_convention"] == "literal"

    def test_invalid_config(self, tmp_path, capsys):
        config = tmp_path / "bad.json"
        config.write_text('{"params": {"gamma_p": -1}}', encoding="utf-8")
        assert main(["run", "--config", str(config), "--out", str(tmp_path / "out")]) == 2
        error = json.loads(capsys.readouterr().err)
        assert error["error_code"] == "CONFIG_ERROR"
        assert error["exit_code"] == 2
        assert not (tmp_path / "out").exists()

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2

    def test_missing_output_dir(self):
        assert main(["metrics"]) == 2

    def test_numerical_failure(self, tmp_path, capsys):
        config = tmp_path / "solve.json"
        config.write_text('{"detuning_mode": "solve", "bracket": [-9.5, -9.2]}', encoding="utf-8")
        assert main(["solve-detuning", "--config", str(config), "--out", str(tmp_path / "out")]) == 3
        error = json.loads(capsys.readouterr().err)
        assert error["success"] is False
        assert not (tmp_path / "out").exists()

    def test_sweep_partial_failure_exit_code(self, tmp_path, capsys):
        config = tmp_path / "sweep.json"
        config.write_text(
            json.dumps({"outputs": ["metrics"], "sweep": {"points": [{}, {"params": {"nbar_p": -1}}]}}),
            encoding="utf-8",
        )
        assert main(["sweep", "--config", str(config), "--out", str(tmp_path / "out"), "--parallel", "1"]) == 4
        error = json.loads(capsys.readouterr().err)
        assert error["error_code"] == "PARTIAL_SWEEP_FAILURE"
        assert error["details"]["failed"] == ["point_001"]
        assert (tmp_path / "out" / "point_000" / "metrics.json").exists()

    def test_output_path_is_file(self, tmp_path, capsys):
        target = tmp_path / "taken"
        target.write_text("x", encoding="utf-8")
        assert main(["metrics", "--out", str(target)]) == 2
        error = json.loads(capsys.readouterr().err)
        assert error["success"] is False
        assert error["error_code"] == "OUTPUT_PATH_ERROR"
        assert error["exit_code"] == 2
        assert target.read_text(encoding="utf-8") == "x"

    def test_output_parent_is_file(self, tmp_path, capsys):
        blocker = tmp_path / "blocker"
        blocker.write_text("x", encoding="utf-8")
        assert main(["metrics", "--out", str(blocker / "run")]) == 2
        assert json.loads(capsys.readouterr().err)["error_code"] == "OUTPUT_PATH_ERROR"


class TestOutputWriter:
    def test_prepare_rejects_file(self, tmp_path):
        target = tmp_path / "file.txt"
        target.write_text("", encoding="utf-8")
        with pytest.raises(OutputPathError) as info:
            OutputWriter(target).prepare()
        assert isinstance(info.value, ConfigError)
        assert info.value.exit_code == 2

    def test_write_failure_is_output_error(self, tmp_path):
        writer = OutputWriter(tmp_path / "out").prepare()
        (tmp_path / "out" / "metrics.json").mkdir()
        with pytest.raises(OutputPathError):
            writer.write_json("metrics.json", {"a": 1})
        assert writer.files == []

    def test_cleanup_removes_created_directory(self, tmp_path):
        writer = OutputWriter(tmp_path / "out").prepare()
        writer.write_json("a.json", {"a": 1})
        writer.cleanup()
        assert not (tmp_path / "out").exists()


class TestSweepErrors:
    def test_point_directory_conflict_is_error_row(self, tmp_path):
        cfg = build_config({"outputs": ["metrics"], "sweep": {"points": [{}, {}]}})
        tmp_path.joinpath("point_001").write_text("x", encoding="utf-8")
        with pytest.raises(SweepPartialFailure) as info:
            SweepService().sweep(cfg, tmp_path, parallel=1)
        assert info.value.details["failed"] == ["point_001"]
        frame = pd.read_csv(tmp_path / AGGREGATE_FILE, keep_default_na=False)
        assert list(frame["status"]) == ["ok", "error"]
        assert frame["error_code"].iloc[1] == "OUTPUT_PATH_ERROR"

    def test_unexpected_exception_is_error_row(self, tmp_path, monkeypatch):
        def broken_execute(self, cfg, out_dir, command="run", outputs=None):
            raise RuntimeError("boom")

        monkeypatch.setattr(ScenarioService, "execute", broken_execute)
        point = expand_points(build_config({"outputs": ["metrics"]}))[0]
        row = run_point({**point, "out_dir": str(tmp_path / "p")})
        assert row["status"] == "error"
        assert row["error_code"] == UNEXPECTED_ERROR_CODE
        assert "RuntimeError: boom" in row["message"]

    def test_sweep_root_is_file(self, tmp_path):
        target = tmp_path / "sweep"
        target.write_text("x", encoding="utf-8")
        with pytest.raises(OutputPathError):
            SweepService().sweep(build_config({"outputs": ["metrics"]}), target, parallel=1)
