# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/coreason_hidldl

"""Loguru sinks: coloured records on stderr, JSON records in ``<log_dir>/hidldl.log``."""

import sys
from pathlib import Path

from loguru import logger

__all__ = ["LOG_FILE_NAME", "configure_logging", "logger"]

LOG_FILE_NAME = "hidldl.log"

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - "
    "<level>{message}</level> <dim>{extra}</dim>"
)


def configure_logging(level: str = "INFO", log_dir: str | Path = "logs") -> Path:
    """Replaces every loguru sink with the package's two sinks.

    Stdout stays free for CLI payloads. The file sink always records DEBUG, so per-iteration
    solver records are kept even when the console is quieter.

    Args:
        level: Console threshold.
        log_dir: Directory of the JSON log file; created when missing.

    Returns:
        Path: The log file.
    """
    directory = Path(log_dir)
    directory.mkdir(parents=True, exist_ok=True)
    log_file = directory / LOG_FILE_NAME

    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=CONSOLE_FORMAT)
    logger.add(log_file, rotation="500 MB", retention="10 days", serialize=True, enqueue=True, level="DEBUG")
    return log_file


configure_logging()
