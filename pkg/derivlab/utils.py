import hashlib
import json
from datetime import datetime
from multiprocessing import Pool
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from sqlalchemy.orm import Session

from .config import settings
from .logging_config import logger
from .models import FailureRecord, GateRecord, RunRecord
from .schemas import GateResult, RunConfig


class RunLedger:
    """Records command runs, gate outcomes and failures"""

    @staticmethod
    def start_run(db: Session, config: RunConfig) -> RunRecord:
        """Open a ledger row for a run"""
        run = RunRecord(
            command=config.command,
            seed=config.seed,
            n=config.n,
            samples=config.samples,
            workers=config.workers,
            output_dir=str(config.output_dir),
            flags=json.dumps(config.flags, sort_keys=True, default=str) if config.flags else None
        )
        db.add(run)
        db.commit()
        return run

    @staticmethod
    def record_gate(db: Session, run_id: Optional[int], gate: GateResult) -> GateRecord:
        """Store one gate outcome"""
        record = GateRecord(
            run_id=run_id,
            name=gate.name,
            observed=gate.observed,
            expected=gate.expected,
            tolerance=gate.tolerance,
            passed=gate.passed
        )
        db.add(record)
        db.commit()
        level = "info" if gate.passed else "error"
        getattr(logger, level)(f"gate {gate.name}: observed={gate.observed:.6g} "
                               f"expected={gate.expected:.6g} tol={gate.tolerance:.3g} "
                               f"{'passed' if gate.passed else 'FAILED'}")
        return record

    @staticmethod
    def record_failure(db: Session, run_id: Optional[int], kind: str, message: str,
                       details: Dict = None) -> FailureRecord:
        """Store a machine-readable failure"""
        failure = FailureRecord(
            run_id=run_id,
            kind=kind,
            message=message,
            details=json.dumps(details, sort_keys=True, default=str) if details else None
        )
        db.add(failure)
        db.commit()
        return failure

    @staticmethod
    def finish_run(db: Session, run_id: int, exit_code: int, status: str) -> Optional[RunRecord]:
        """Close a run with its exit code and wall time"""
        run = db.query(RunRecord).filter(RunRecord.id == run_id).first()
        if run:
            run.exit_code = exit_code
            run.status = status
            run.finished_at = datetime.utcnow()
            run.wall_time = (run.finished_at - run.started_at).total_seconds()
            db.commit()
        return run

    @staticmethod
    def recent_runs(db: Session, command: str = None, limit: int = 20) -> List[RunRecord]:
        """Most recent runs, optionally for one command"""
        query = db.query(RunRecord)
        if command:
            query = query.filter(RunRecord.command == command)
        return query.order_by(RunRecord.id.desc()).limit(limit).all()


class ManifestManager:
    """Checksums for run artifacts"""

    @staticmethod
    def calculate_file_hash(filepath: Path) -> str:
        """Calculate SHA256 hash of a file"""
        hash_sha256 = hashlib.sha256()
        with open(filepath, "rb") as f:
            for chunk in iter(lambda: f.read(4096), b""):
                hash_sha256.update(chunk)
        return hash_sha256.hexdigest()

    @staticmethod
    def describe_artifacts(run_dir: Path, artifacts: Sequence[Path]) -> List[Dict[str, Any]]:
        """path relative to the run directory, sha256 and size of each artifact"""
        described = []
        for artifact in sorted(Path(a) for a in artifacts):
            try:
                name = str(artifact.relative_to(run_dir))
            except ValueError:
                name = str(artifact)
            described.append({
                "path": name,
                "sha256": ManifestManager.calculate_file_hash(artifact),
                "bytes": artifact.stat().st_size
            })
        return described


class SeedPartitioner:
    """Contiguous seed blocks, each with its own child SeedSequence"""

    @staticmethod
    def blocks(samples: int, block_size: int = None) -> List[Tuple[int, int]]:
        """(block index, block sample count) covering `samples`"""
        block_size = block_size or settings.SEED_BLOCK_SIZE
        full, remainder = divmod(samples, block_size)
        sizes = [block_size] * full + ([remainder] if remainder else [])
        return list(enumerate(sizes))

    @staticmethod
    def block_rng(seed: int, index: int) -> np.random.Generator:
        """Generator for block `index` of a run with master `seed`"""
        return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))

    @staticmethod
    def run_blocks(func: Callable, seed: int, samples: int, workers: int = 1,
                   block_size: int = None, extra: Tuple = ()) -> List[Any]:
        """
        Call func(index, count, seed, *extra) for every block and return the
        results in block order. func must be a module-level function when
        workers > 1.
        """
        tasks = [(index, count, seed) + tuple(extra)
                 for index, count in SeedPartitioner.blocks(samples, block_size)]
        logger.debug(f"{len(tasks)} seed block(s) on {workers} worker(s)")
        return SeedPartitioner.map_tasks(func, tasks, workers)

    @staticmethod
    def map_tasks(func: Callable, tasks: Sequence[Tuple], workers: int = 1) -> List[Any]:
        """func(*task) for every task, results in task order"""
        if workers <= 1 or len(tasks) <= 1:
            return [func(*task) for task in tasks]
        with Pool(processes=min(workers, len(tasks))) as pool:
            return pool.starmap(func, tasks)


class ConfigManager:
    """Configuration management utilities"""

    @staticmethod
    def load_run_defaults(config_file: Path) -> Dict:
        """Load CLI defaults from a JSON file; keys use the long flag names"""
        with open(config_file, "r") as f:
            payload = json.load(f)
        if not isinstance(payload, dict):
            raise ValueError(f"{config_file} must hold a JSON object")
        return {key.lstrip("-").replace("-", "_"): value for key, value in payload.items()}

    @staticmethod
    def get_system_config() -> Dict:
        """Numerical settings recorded in every manifest"""
        return {
            "residual_tol": settings.RESIDUAL_TOL,
            "unit_modulus_tol": settings.UNIT_MODULUS_TOL,
            "max_phase_step": settings.MAX_PHASE_STEP,
            "batch_count": settings.BATCH_COUNT,
            "seed_block_size": settings.SEED_BLOCK_SIZE,
            "zeta_residual_tol": settings.ZETA_RESIDUAL_TOL
        }
