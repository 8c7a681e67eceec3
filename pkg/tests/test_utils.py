import json

import numpy as np
import pytest

from derivlab.database import make_session, reset_database
from derivlab.experiments import SPACING_EDGES, _spacing_block
from derivlab.models import FailureRecord, GateRecord, RunRecord
from derivlab.schemas import GateResult, RunConfig
from derivlab.utils import ConfigManager, ManifestManager, RunLedger, SeedPartitioner


@pytest.fixture
def db():
    session = make_session()
    yield session
    session.close()


def test_ledger_records_a_run(db, tmp_path):
    config = RunConfig(command="spacing", n=40, samples=100, seed=3, output_dir=tmp_path, flags={"check": True})
    run = RunLedger.start_run(db, config)
    assert run.status == "running"
    assert json.loads(run.flags) == {"check": True}

    RunLedger.record_gate(db, run.id, GateResult(name="g", observed=1.0, expected=1.0, tolerance=0.1, passed=True))
    RunLedger.record_failure(db, run.id, "domain", "bad theta", {"theta": 0.4})
    finished = RunLedger.finish_run(db, run.id, 1, "invalid")

    assert finished.exit_code == 1
    assert finished.wall_time >= 0
    assert db.query(GateRecord).filter(GateRecord.run_id == run.id).count() == 1
    failure = db.query(FailureRecord).one()
    assert json.loads(failure.details) == {"theta": 0.4}
    assert RunLedger.finish_run(db, 999, 0, "ok") is None


def test_recent_runs_newest_first(db, tmp_path):
    for command in ("tables", "spacing", "tables"):
        RunLedger.start_run(db, RunConfig(command=command, output_dir=tmp_path))
    recent = RunLedger.recent_runs(db)
    assert [r.id for r in recent] == [3, 2, 1]
    assert len(RunLedger.recent_runs(db, command="tables")) == 2
    assert db.query(RunRecord).count() == 3


def test_file_hash_and_artifact_description(tmp_path):
    artifact = tmp_path / "sub" / "x.csv"
    artifact.parent.mkdir()
    artifact.write_bytes(b"abc")
    assert ManifestManager.calculate_file_hash(artifact) == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad")
    described = ManifestManager.describe_artifacts(tmp_path, [artifact])
    assert described == [{"path": "sub/x.csv", "sha256": ManifestManager.calculate_file_hash(artifact),
                          "bytes": 3}]


def test_seed_blocks():
    assert SeedPartitioner.blocks(4500, 2000) == [(0, 2000), (1, 2000), (2, 500)]
    assert SeedPartitioner.blocks(4000, 2000) == [(0, 2000), (1, 2000)]
    a = SeedPartitioner.block_rng(7, 1).standard_normal(3)
    b = SeedPartitioner.block_rng(7, 1).standard_normal(3)
    c = SeedPartitioner.block_rng(7, 2).standard_normal(3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_block_results_do_not_depend_on_workers():
    args = dict(seed=5, samples=300, block_size=100, extra=(10, SPACING_EDGES.tolist()))
    inline = SeedPartitioner.run_blocks(_spacing_block, workers=1, **args)
    pooled = SeedPartitioner.run_blocks(_spacing_block, workers=2, **args)
    assert len(inline) == 3
    assert [h.counts for h in inline] == [h.counts for h in pooled]


def test_map_tasks_keeps_order():
    assert SeedPartitioner.map_tasks(pow, [(2, 3), (3, 2)]) == [8, 9]


def test_run_defaults_file(tmp_path):
    path = tmp_path / "defaults.json"
    path.write_text(json.dumps({"--theta-max": 0.2, "samples": 50}))
    assert ConfigManager.load_run_defaults(path) == {"theta_max": 0.2, "samples": 50}
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        ConfigManager.load_run_defaults(path)


def test_system_config():
    config = ConfigManager.get_system_config()
    assert config["seed_block_size"] == 2000
    assert "residual_tol" in config


def test_reset_database_empties_the_ledger(db, tmp_path):
    RunLedger.start_run(db, RunConfig(command="tables", output_dir=tmp_path))
    db.close()
    reset_database(db.get_bind())
    assert db.query(RunRecord).count() == 0
