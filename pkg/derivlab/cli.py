"""
Command-line front end.

    python -m derivlab.cli deriv-dist --ensemble cue --n 40 --samples 100000 --seed 7

Exit codes: 0 success, 1 validation failure, 2 numerical-gate failure,
64 usage error. Every non-zero exit writes failure.json and a ledger row.
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError
from sqlalchemy.orm import Session

from .config import settings
from .database import get_db
from .errors import (ContourResolutionError, DerivLabError, DomainError, GateFailure,
                     IncompleteScanError, UniquenessViolation, UsageError)
from .experiments import COMMANDS, run_experiment
from .lab.stats_io import write_json, write_manifest
from .logging_config import logger, run_log, set_level
from .schemas import Ensemble, RunConfig
from .utils import ConfigManager, RunLedger

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_GATE = 2
EXIT_USAGE = 64

COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "deriv-dist": {"n": 40, "samples": 10_000},
    "cdf-tail": {"n": 40, "samples": 10_000},
    "spacing": {"n": 40, "samples": 10_000},
    "verify-expansion": {"n": 24, "samples": 100, "theta": [0.01, 0.02, 0.04]},
    "conditioned-moments": {"n": 12, "samples": 100_000},
    "one-level": {"n": 22, "samples": 100_000},
    "zeta-scan": {"t_lo": 1000.0, "t_hi": 2000.0},
    "uniqueness-check": {"n": 16, "samples": 10_000, "theta_max": 0.25},
    "tables": {"n": 40},
    "lemma-bounds": {"samples": 100_000, "trials": 1000},
}

FLAG_NAMES = ("theta", "theta_max", "t_lo", "t_hi", "check", "trials", "min_samples", "dump_roots")


class LabArgumentParser(argparse.ArgumentParser):
    """argparse parser that raises UsageError instead of exiting"""

    def error(self, message):
        raise UsageError(message)


def _theta_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common_options() -> argparse.ArgumentParser:
    common = LabArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="Master seed (default 0)")
    common.add_argument("--workers", type=int, help="Worker processes (default from settings)")
    common.add_argument("--output-dir", type=Path, help="Artifact root directory")
    common.add_argument("--config", type=Path, help="JSON file with default flag values")
    common.add_argument("--manifest-only", action="store_true", help="Write the manifest and stop")
    common.add_argument("--log-level", help="Logger level (DEBUG, INFO, ...)")
    common.add_argument("--check", action="store_true", default=None, help="Evaluate statistical gates")
    return common


def build_parser() -> LabArgumentParser:
    parser = LabArgumentParser(prog="derivlab", description="Derivative zeros laboratory")
    subparsers = parser.add_subparsers(dest="command", parser_class=LabArgumentParser)
    common = _common_options()

    def sub(name: str, help_text: str, n: bool = True, samples: bool = True):
        p = subparsers.add_parser(name, help=help_text, parents=[common])
        if n:
            p.add_argument("--n", type=int, help="Matrix size N")
        if samples:
            p.add_argument("--samples", type=int, help="Number of samples")
        return p

    p = sub("deriv-dist", "S-histogram of derivative roots")
    p.add_argument("--ensemble", type=str.upper, choices=["CUE", "COE", "POISSON"], help="Ensemble")
    p.add_argument("--dump-roots", action="store_true", default=None,
                   help="Also write every S value, one per line, to s_values.csv")
    p = sub("cdf-tail", "Small-s CDF of S against the two-term law")
    p.add_argument("--ensemble", type=str.upper, choices=["CUE", "COE", "POISSON"], help="Ensemble")
    sub("spacing", "Nearest-neighbour spacing CDF against its expansion")
    p = sub("verify-expansion", "Fit b1, b2 from delta(theta)")
    p.add_argument("--theta", type=_theta_list, help="Comma-separated theta values")
    p = sub("conditioned-moments", "Importance-sampled conditioned moments")
    p.add_argument("--min-samples", type=int, help="Lower bound on the sample count")
    sub("one-level", "Weighted 1-level density against W_1")
    p = sub("zeta-scan", "Zeros of zeta' in a height range", n=False, samples=False)
    p.add_argument("--t-lo", type=float, help="Lower height")
    p.add_argument("--t-hi", type=float, help="Upper height")
    p = sub("uniqueness-check", "Argument-principle counts in the close-pair disk")
    p.add_argument("--theta-max", type=float, help="Largest pair gap")
    p.add_argument("--trials", type=int, dest="samples", help="Number of trials")
    sub("tables", "Analytic curves as CSV", samples=False)
    p = sub("lemma-bounds", "Grid and random checks of the uniqueness bounds", n=False)
    p.add_argument("--trials", type=int, help="Number of random points for the grid maximum")
    return parser


def _resolve(args: argparse.Namespace) -> Dict[str, Any]:
    """Command defaults, then the JSON config file, then explicit flags"""
    values = dict(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config is not None:
        values.update(ConfigManager.load_run_defaults(args.config))
    for key, value in vars(args).items():
        if value is not None and value is not False:
            values[key] = value
    return values


def build_run_config(args: argparse.Namespace) -> RunConfig:
    values = _resolve(args)
    if "theta" in values and not isinstance(values["theta"], list):
        values["theta"] = _theta_list(str(values["theta"]))
    return RunConfig(
        command=args.command,
        n=values.get("n"),
        samples=values.get("samples"),
        seed=values.get("seed", 0),
        workers=values.get("workers", settings.WORKERS),
        output_dir=Path(values.get("output_dir", settings.OUTPUT_DIR)),
        ensemble=Ensemble(str(values.get("ensemble", "CUE")).upper()),
        flags={name: values[name] for name in FLAG_NAMES if name in values},
    )


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, (GateFailure, UniquenessViolation, IncompleteScanError, ContourResolutionError)):
        return EXIT_GATE
    if isinstance(exc, (ValidationError, DomainError, ValueError, OSError)):
        return EXIT_INVALID
    if isinstance(exc, DerivLabError):
        return EXIT_GATE
    return EXIT_INVALID


def _failure_payload(exc: BaseException, code: int) -> Dict[str, Any]:
    kind = getattr(exc, "kind", "validation" if isinstance(exc, (ValidationError, ValueError, OSError)) else "error")
    details = exc.details() if isinstance(exc, DerivLabError) else {}
    return {"kind": kind, "message": str(exc), "exit_code": code, "details": details}


def _record_failure(ledger: Session, run_id: Optional[int], run_dir: Optional[Path], exc: BaseException) -> int:
    code = _exit_code(exc)
    payload = _failure_payload(exc, code)
    logger.error(f"{payload['kind']}: {exc}")
    target = run_dir if run_dir is not None else Path(settings.OUTPUT_DIR)
    try:
        write_json(target / "failure.json", payload)
        RunLedger.record_failure(ledger, run_id, payload["kind"], payload["message"], payload["details"])
        if run_id is not None:
            status = {EXIT_GATE: "gate_failed", EXIT_USAGE: "usage"}.get(code, "invalid")
            RunLedger.finish_run(ledger, run_id, code, status)
    except Exception as inner:
        logger.error(f"could not record failure: {inner}")
    return code


def _execute(config: RunConfig, run_dir: Path, run_id: int, ledger: Session, manifest_only: bool) -> int:
    started = time.perf_counter()
    info = {"command": config.command, "seed": config.seed, "N": config.n, "samples": config.samples,
            "workers": config.workers, "ensemble": config.ensemble.value, "flags": config.flags,
            "settings": ConfigManager.get_system_config()}

    if manifest_only:
        write_manifest(run_dir, dict(info, wall_time=0.0, dry_run=True), [])
        RunLedger.finish_run(ledger, run_id, EXIT_OK, "ok")
        return EXIT_OK

    outcome = run_experiment(config, run_dir)
    for gate in outcome.gates:
        RunLedger.record_gate(ledger, run_id, gate)
    info.update({"wall_time": time.perf_counter() - started,
                 "gates": [g.model_dump() for g in outcome.gates]})
    write_manifest(run_dir, info, outcome.artifacts)
    if outcome.failed_gates:
        raise GateFailure([g.model_dump() for g in outcome.failed_gates])

    RunLedger.finish_run(ledger, run_id, EXIT_OK, "ok")
    logger.info(f"{config.command} finished in {time.perf_counter() - started:.1f}s -> {run_dir}")
    return EXIT_OK


def _run(argv: List[str], ledger: Session) -> int:
    run_dir: Optional[Path] = None
    run_id: Optional[int] = None
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if not args.command:
            raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
        if args.log_level:
            set_level(args.log_level)

        config = build_run_config(args)
        run_dir = settings.get_run_dir(config.command, config.seed, config.output_dir)
        run_id = RunLedger.start_run(ledger, config).id
        with run_log(run_dir):
            try:
                return _execute(config, run_dir, run_id, ledger, args.manifest_only)
            except Exception as exc:
                return _record_failure(ledger, run_id, run_dir, exc)
    except Exception as exc:
        return _record_failure(ledger, run_id, run_dir, exc)


def run(argv: Optional[List[str]] = None, db: Optional[Session] = None) -> int:
    """Parse argv, run one experiment, return the exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    if db is not None:
        return _run(argv, db)
    with get_db() as ledger:
        return _run(argv, ledger)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
