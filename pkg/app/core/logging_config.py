"""
Logging for the CLI. Records go to stderr so stdout stays free for CSV output;
a timestamped file under LOG_DIR is added when LOG_TO_FILE is set.
"""
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional

from app.core.config import settings

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def _file_handler(log_dir: Path, formatter: logging.Formatter) -> logging.Handler:
    log_dir.mkdir(parents=True, exist_ok=True)
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    handler = logging.FileHandler(log_dir / f"ciid_lab_{stamp}.log", encoding="utf-8")
    handler.setFormatter(formatter)
    return handler


def setup_logger(name: str = settings.APP_NAME, log_dir: Optional[Path] = None) -> logging.Logger:
    log = logging.getLogger(name)
    log.setLevel(getattr(logging, settings.LOG_LEVEL, logging.INFO))
    log.propagate = False

    for old in list(log.handlers):
        log.removeHandler(old)
        old.close()

    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
    stderr_handler = logging.StreamHandler()
    stderr_handler.setFormatter(formatter)
    log.addHandler(stderr_handler)

    target = log_dir if log_dir is not None else settings.log_path
    if target is not None:
        try:
            log.addHandler(_file_handler(target, formatter))
        except OSError as exc:
            log.warning(f"File logging disabled : log_dir={target} , error={exc}")
    return log


def banner(title: str) -> str:
    return f"-------------------------------  {title.upper()} -------------------------------"


logger = setup_logger()
