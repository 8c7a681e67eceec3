import json

import pytest

from derivlab import cli, experiments
from derivlab.config import settings
from derivlab.database import make_session
from derivlab.experiments import ExperimentOutcome, make_gate
from derivlab.models import FailureRecord, RunRecord


@pytest.fixture
def db():
    session = make_session()
    yield session
    session.close()


@pytest.fixture(autouse=True)
def isolated_output(monkeypatch, tmp_path):
    monkeypatch.setattr(settings, "OUTPUT_DIR", tmp_path / "default")


def _manifest(run_dir):
    return json.loads((run_dir / "manifest.json").read_text())


def test_tables_run(db, tmp_path):
    code = cli.run(["tables", "--n", "12", "--output-dir", str(tmp_path)], db)
    assert code == cli.EXIT_OK
    run_dir = tmp_path / "tables-seed0"
    manifest = _manifest(run_dir)
    names = {entry["path"] for entry in manifest["artifacts"]}
    assert {"spacing_expansion.csv", "q_asymptotics.csv", "deldist.csv", "moments.csv", "w1.csv",
            "summary.json"} <= names
    assert manifest["N"] == 12
    run = db.query(RunRecord).one()
    assert (run.status, run.exit_code) == ("ok", 0)
    assert "tables finished" in (run_dir / "run.log").read_text()


def test_help_exits_cleanly(db, capsys):
    assert cli.run(["--help"], db) == cli.EXIT_OK
    assert "deriv-dist" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["no-such-command"], ["tables", "--bogus"], []])
def test_usage_errors(db, argv):
    assert cli.run(argv, db) == cli.EXIT_USAGE
    assert db.query(FailureRecord).one().kind == "usage"


def test_invalid_values(db, tmp_path):
    assert cli.run(["spacing", "--samples", "-3", "--output-dir", str(tmp_path)], db) == cli.EXIT_INVALID
    assert (settings.OUTPUT_DIR / "failure.json").exists()


def test_domain_error_writes_failure(db, tmp_path):
    argv = ["verify-expansion", "--theta", "0.1,0.2,0.4", "--samples", "1", "--output-dir", str(tmp_path)]
    assert cli.run(argv, db) == cli.EXIT_INVALID
    failure = json.loads((tmp_path / "verify-expansion-seed0" / "failure.json").read_text())
    assert failure["exit_code"] == 1
    assert failure["kind"] == "domain"
    run = db.query(RunRecord).one()
    assert (run.status, run.exit_code) == ("invalid", 1)


def test_manifest_only(db, tmp_path):
    argv = ["spacing", "--seed", "3", "--manifest-only", "--output-dir", str(tmp_path)]
    assert cli.run(argv, db) == cli.EXIT_OK
    manifest = _manifest(tmp_path / "spacing-seed3")
    assert manifest["dry_run"] is True
    assert manifest["artifacts"] == []
    assert manifest["samples"] == 10_000


def test_config_file_defaults_and_overrides(db, tmp_path):
    config = tmp_path / "defaults.json"
    config.write_text(json.dumps({"n": 8, "seed": 4, "theta-max": 0.1}))
    assert cli.run(["uniqueness-check", "--manifest-only", "--config", str(config),
                    "--output-dir", str(tmp_path)], db) == 0
    manifest = _manifest(tmp_path / "uniqueness-check-seed4")
    assert manifest["N"] == 8
    assert manifest["flags"]["theta_max"] == 0.1

    assert cli.run(["uniqueness-check", "--manifest-only", "--config", str(config), "--n", "20",
                    "--output-dir", str(tmp_path)], db) == 0
    assert _manifest(tmp_path / "uniqueness-check-seed4")["N"] == 20


def test_failed_gate_exit_code(db, tmp_path, monkeypatch):
    def failing(config, run_dir):
        return ExperimentOutcome(gates=[make_gate("always_off", 1.0, 0.0, 0.1)])

    monkeypatch.setitem(experiments.COMMANDS, "tables", failing)
    assert cli.run(["tables", "--output-dir", str(tmp_path)], db) == cli.EXIT_GATE
    failure = json.loads((tmp_path / "tables-seed0" / "failure.json").read_text())
    assert failure["exit_code"] == 2
    assert _manifest(tmp_path / "tables-seed0")["gates"][0]["passed"] is False
    run = db.query(RunRecord).one()
    assert run.status == "gate_failed"


def test_dump_roots_writes_every_s_value(db, tmp_path):
    argv = ["deriv-dist", "--n", "8", "--samples", "30", "--dump-roots", "--output-dir", str(tmp_path)]
    assert cli.run(argv, db) == cli.EXIT_OK
    run_dir = tmp_path / "deriv-dist-seed0"
    lines = (run_dir / "s_values.csv").read_text().splitlines()
    summary = json.loads((run_dir / "summary.json").read_text())["summary"]
    assert lines[0] == "s"
    assert len(lines) - 1 == 30 * 7 - summary["flagged_roots"]
    assert "s_values.csv" in {entry["path"] for entry in _manifest(run_dir)["artifacts"]}


def test_s_values_are_not_written_by_default(db, tmp_path):
    assert cli.run(["deriv-dist", "--n", "8", "--samples", "30", "--output-dir", str(tmp_path)], db) == 0
    assert not (tmp_path / "deriv-dist-seed0" / "s_values.csv").exists()


@pytest.mark.slow
@pytest.mark.parametrize("ensemble", ["cue", "coe"])
def test_second_bump_gate(db, tmp_path, ensemble):
    argv = ["deriv-dist", "--ensemble", ensemble, "--n", "40", "--samples", "20000", "--check",
            "--workers", "2", "--output-dir", str(tmp_path)]
    assert cli.run(argv, db) == cli.EXIT_OK
    summary = json.loads((tmp_path / "deriv-dist-seed0" / "summary.json").read_text())
    assert summary["summary"]["modes"] == 2
    assert [g["name"] for g in summary["gates"]] == ["bimodality"]


def test_histograms_do_not_depend_on_workers(db, tmp_path):
    outputs = []
    for workers in (1, 2):
        out = tmp_path / f"w{workers}"
        argv = ["deriv-dist", "--n", "10", "--samples", "5000", "--seed", "11", "--workers", str(workers),
                "--output-dir", str(out)]
        assert cli.run(argv, db) == cli.EXIT_OK
        outputs.append((out / "deriv-dist-seed11" / "s_histogram.csv").read_bytes())
    assert outputs[0] == outputs[1]
