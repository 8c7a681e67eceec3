import logging
import logging.handlers
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path

from .config import settings

DETAILED_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(module)s:%(lineno)d - %(message)s'
SIMPLE_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def _rotating(path: Path, level: int) -> logging.Handler:
    handler = logging.handlers.RotatingFileHandler(
        path,
        maxBytes=10*1024*1024,  # 10MB
        backupCount=5
    )
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(DETAILED_FORMAT))
    return handler


def setup_logging(level: str = None) -> logging.Logger:
    """Console plus dated rotating files under LOGS_DIR (all levels, errors only)"""
    settings.LOGS_DIR.mkdir(parents=True, exist_ok=True)

    lab_logger = logging.getLogger("derivlab")
    lab_logger.setLevel(getattr(logging, (level or settings.LOG_LEVEL).upper()))

    # Prevent duplicate handlers
    if lab_logger.handlers:
        return lab_logger

    console = logging.StreamHandler()
    console.setLevel(logging.INFO)
    console.setFormatter(logging.Formatter(SIMPLE_FORMAT))
    lab_logger.addHandler(console)

    stamp = datetime.now().strftime('%Y%m%d')
    lab_logger.addHandler(_rotating(settings.LOGS_DIR / f"derivlab_{stamp}.log", logging.DEBUG))
    lab_logger.addHandler(_rotating(settings.LOGS_DIR / f"derivlab_errors_{stamp}.log", logging.ERROR))
    return lab_logger


def set_level(level: str):
    """Change the level of the lab logger after startup"""
    logger.setLevel(getattr(logging, level.upper()))


@contextmanager
def run_log(run_dir: Path):
    """Copy every record emitted inside the block to <run_dir>/run.log"""
    handler = logging.FileHandler(Path(run_dir) / "run.log")
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(logging.Formatter(DETAILED_FORMAT))
    logger.addHandler(handler)
    try:
        yield handler
    finally:
        logger.removeHandler(handler)
        handler.close()


# Create global logger instance
logger = setup_logging()
