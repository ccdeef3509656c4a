"""Tests for run configuration, solver settings and the session log."""
import json

import pytest
from pydantic import ValidationError

from src.multi_elicit.config import RunConfig
from src.multi_elicit.errors import ConfigurationError
from src.multi_elicit.session_log import SessionLog
from src.multi_elicit.settings import (
    SolverSettings,
    WitnessSettings,
    load_settings_from_yaml,
    try_load_settings_from_yaml,
)


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MULTI_ELICIT_JOBS", raising=False)
    monkeypatch.delenv("MULTI_ELICIT_LOG_FILE", raising=False)
    return tmp_path


# =============================================================================
# SETTINGS
# =============================================================================

def test_settings_defaults():
    settings = SolverSettings()
    assert settings.minimizer.coarse_grid == 512
    assert settings.witness.quantiles == (0.35, 0.65)
    assert settings.regression.grid_points == 1001


@pytest.mark.parametrize("quantiles", [(0.0, 0.5), (0.5, 0.5), (0.2, 1.0)])
def test_witness_quantiles_validation(quantiles):
    with pytest.raises(ValidationError):
        WitnessSettings(quantiles=quantiles)


def test_load_settings_from_yaml(isolated_cwd):
    path = isolated_cwd / "solver.yaml"
    path.write_text("minimizer:\n  coarse_grid: 64\nwitness:\n  slab: 1.0e-8\n", encoding="utf-8")
    settings = load_settings_from_yaml(str(path))
    assert settings.minimizer.coarse_grid == 64
    assert settings.witness.slab == 1e-8
    assert settings.voronoi.tie_tol == 1e-10


def test_load_settings_nested_key(isolated_cwd):
    path = isolated_cwd / "run.json"
    path.write_text(json.dumps({"loss": "mean1", "settings": {"minimizer": {"sweeps": 3}}}), encoding="utf-8")
    assert load_settings_from_yaml(str(path)).minimizer.sweeps == 3


def test_load_settings_errors(isolated_cwd):
    empty = isolated_cwd / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ValueError):
        load_settings_from_yaml(str(empty))
    listing = isolated_cwd / "list.yaml"
    listing.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_settings_from_yaml(str(listing))
    with pytest.raises(FileNotFoundError):
        load_settings_from_yaml("missing.yaml")
    assert try_load_settings_from_yaml("missing.yaml") is None


# =============================================================================
# RUN CONFIG
# =============================================================================

def test_run_config_defaults():
    cfg = RunConfig(command="verify")
    assert cfg.resolution == 10
    assert cfg.tol == 1e-3
    assert cfg.settings == SolverSettings()


@pytest.mark.parametrize("field", ["tol", "level_tol"])
def test_run_config_rejects_non_positive_tolerance(field):
    with pytest.raises(ValidationError):
        RunConfig(command="witness", **{field: 0.0})


def test_run_config_rejects_unknown_command():
    with pytest.raises(ValidationError):
        RunConfig(command="plot")


def test_settings_priority(isolated_cwd):
    (isolated_cwd / "config.yaml").write_text("minimizer:\n  coarse_grid: 32\n", encoding="utf-8")
    run_file = isolated_cwd / "run.yaml"
    run_file.write_text("minimizer:\n  coarse_grid: 128\n", encoding="utf-8")

    assert RunConfig(command="verify").settings.minimizer.coarse_grid == 32
    assert RunConfig(command="verify", config_file=str(run_file)).settings.minimizer.coarse_grid == 128
    direct = SolverSettings(minimizer={"coarse_grid": 256})
    cfg = RunConfig(command="verify", config_file=str(run_file), settings=direct)
    assert cfg.settings.minimizer.coarse_grid == 256


def test_from_sources_flags_win(isolated_cwd):
    run_file = isolated_cwd / "run.json"
    run_file.write_text(json.dumps({"loss": "mean1", "property": "mean", "resolution": 5}), encoding="utf-8")
    cfg = RunConfig.from_sources("verify", {"resolution": 7, "tol": None}, config_file=str(run_file))
    assert cfg.loss == "mean1"
    assert cfg.property == "mean"
    assert cfg.resolution == 7
    assert cfg.tol == 1e-3
    assert cfg.config_file == str(run_file)


def test_from_sources_errors(isolated_cwd):
    with pytest.raises(FileNotFoundError):
        RunConfig.from_sources("verify", {}, config_file="missing.json")
    listing = isolated_cwd / "list.yaml"
    listing.write_text("- verify\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        RunConfig.from_sources("verify", {}, config_file=str(listing))


def test_from_sources_environment(monkeypatch, isolated_cwd):
    monkeypatch.setenv("MULTI_ELICIT_JOBS", "3")
    monkeypatch.setenv("MULTI_ELICIT_LOG_FILE", str(isolated_cwd / "session.log"))
    cfg = RunConfig.from_sources("catalog", {})
    assert cfg.jobs == 3
    assert cfg.log_file.endswith("session.log")
    assert RunConfig.from_sources("catalog", {"jobs": 1}).jobs == 1


def test_require():
    cfg = RunConfig(command="witness", property="variance")
    cfg.require("property")
    with pytest.raises(ConfigurationError, match="--r1, --r2"):
        cfg.require("property", "r1", "r2")


# =============================================================================
# SESSION LOG
# =============================================================================

def test_session_log_file(isolated_cwd):
    path = isolated_cwd / "logs" / "session.log"
    log = SessionLog(verbose=False, log_file=str(path))
    log.section("verify")
    log.info("[dim]scanning[/dim] 66 points")
    log.success("done")
    log.close()
    text = path.read_text(encoding="utf-8")
    assert "NEW SESSION" in text
    assert "END OF SESSION" in text
    assert "scanning 66 points" in text
    assert "[dim]" not in text
    assert "✓ done" in text
