"""End-to-end tests of the multi-elicit command line."""
import json

import pytest

from src.multi_elicit.cli import build_parser, main


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MULTI_ELICIT_JOBS", raising=False)
    monkeypatch.delenv("MULTI_ELICIT_LOG_FILE", raising=False)
    return tmp_path


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_verify_passes(capsys):
    code, out = _run(capsys, "verify", "--loss", "variance2", "--property", "variance",
                     "--outcomes", "0,1,2,3", "--grid", "10")
    report = json.loads(out)
    assert code == 0
    assert report["passed"] is True
    assert report["status"] == "verified (grid)"
    assert report["evaluated"] == 286


def test_verify_fails_for_wrong_loss(capsys):
    code, out = _run(capsys, "verify", "--loss", "mean1", "--property", "variance", "--outcomes", "0,1")
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_verify_unknown_loss(capsys):
    code, out = _run(capsys, "verify", "--loss", "nope1", "--property", "variance")
    assert code == 2
    assert out == ""


def test_verify_missing_option(capsys):
    code, _ = _run(capsys, "verify", "--loss", "variance2")
    assert code == 2


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["verify", "--grid", "ten"])
    assert exc.value.code == 2


def test_witness_found(capsys):
    code, out = _run(capsys, "witness", "--property", "variance", "--m", "1",
                     "--r1", "0.16", "--r2", "0.21", "--outcomes", "0,1")
    document = json.loads(out)
    assert code == 0
    assert document["status"] == "witness"
    assert document["residual"] <= 1e-7
    assert "lambda" in document["group1"][0]


def test_witness_fourth_moment_two_observations(capsys):
    code, out = _run(capsys, "witness", "--property", "central_moment4", "--m", "2",
                     "--r1", "0.07", "--r2", "0.08", "--outcomes", "0,1")
    assert code == 0
    assert json.loads(out)["m"] == 2


def test_witness_not_found(capsys):
    code, out = _run(capsys, "witness", "--property", "variance", "--m", "2",
                     "--r1", "0.16", "--r2", "0.21", "--outcomes", "0,1")
    assert code == 1
    assert json.loads(out)["status"] == "no_witness_in_sample"


def test_witness_unattained_level(capsys):
    code, _ = _run(capsys, "witness", "--property", "variance", "--r1", "0.3", "--r2", "0.2",
                   "--outcomes", "0,1")
    assert code == 2


def test_frontier_csv(capsys):
    code, out = _run(capsys, "frontier", "--property", "variance", "--outcomes", "0,1")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "d,m,status,evidence"
    assert len(lines) == 5
    assert lines[1].startswith("1,1,refuted,")


def test_voronoi_variance_bands(capsys):
    code, out = _run(capsys, "voronoi", "--bands", "variance", "--outcomes", "1,2,3",
                     "--thresholds", "0.3,0.6", "--grid", "10")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "p_0,p_1,p_2,stat,labels"
    assert len(lines) == 67


def test_voronoi_sites_file(capsys, isolated_cwd):
    sites = {
        "labels": ["A", "B"],
        "m": 1,
        "sites": [[1.0, 0.0], [0.0, 1.0]],
    }
    path = isolated_cwd / "sites.json"
    path.write_text(json.dumps(sites), encoding="utf-8")
    code, out = _run(capsys, "voronoi", "--sites", str(path), "--grid", "2")
    lines = out.splitlines()
    assert code == 0
    assert len(lines) == 4
    assert "0.5,0.5,,A|B" in lines


def test_voronoi_needs_a_source(capsys):
    code, _ = _run(capsys, "voronoi")
    assert code == 2


def test_regress_csv(capsys):
    code, out = _run(capsys, "regress", "--a", "2", "--n", "200", "--trials", "3", "--seed", "5")
    lines = out.splitlines()
    assert code == 0
    assert len(lines) == 3
    assert lines[1].startswith("200,2,3,sliding,multi_obs,")


def test_catalog(capsys):
    code, out = _run(capsys, "catalog")
    assert code == 0
    assert "variance2" in out
    assert "central_moment" in out


def test_out_file(capsys, isolated_cwd):
    target = isolated_cwd / "results" / "frontier.csv"
    code, out = _run(capsys, "frontier", "--property", "mean", "--max-d", "1", "--max-m", "1",
                     "--out", str(target))
    assert code == 0
    assert out == ""
    assert target.read_text(encoding="utf-8").startswith("d,m,status,evidence\n1,1,verified,")


def test_config_file(capsys, isolated_cwd):
    run_file = isolated_cwd / "run.json"
    run_file.write_text(json.dumps({
        "loss": "knorm2",
        "property": "knorm(2)",
        "outcomes": [0, 1, 2],
        "resolution": 6,
        "minimizer": {"coarse_grid": 256},
    }), encoding="utf-8")
    code, out = _run(capsys, "verify", "--config", str(run_file))
    assert code == 0
    assert json.loads(out)["resolution"] == 6


def test_log_file(capsys, isolated_cwd):
    log_path = isolated_cwd / "session.log"
    code, _ = _run(capsys, "catalog", "--log-file", str(log_path))
    assert code == 0
    assert "multi-elicit catalog" in log_path.read_text(encoding="utf-8")
