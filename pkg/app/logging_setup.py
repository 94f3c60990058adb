"""
Loguru sinks for the command line and per-run log files
"""

import os
import sys
from pathlib import Path
from typing import Optional, Union

from loguru import logger

CONSOLE_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | {name}:{function} - {message}"
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} - {message}"


def configure_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None) -> None:
    """
    Replace the default sink with a stderr sink at `level` (LOG_LEVEL, else INFO)

    Args:
        level: console level
        log_file: optional DEBUG file sink
    """
    logger.remove()
    logger.add(sys.stderr, level=(level or os.getenv("LOG_LEVEL", "INFO")).upper(), format=CONSOLE_FORMAT)
    if log_file is not None:
        add_run_log(log_file)


def add_run_log(path: Union[str, Path]) -> int:
    """Attach a DEBUG sink writing to `path`; returns the sink id for logger.remove"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return logger.add(str(path), level="DEBUG", format=FILE_FORMAT, mode="w", enqueue=False)
