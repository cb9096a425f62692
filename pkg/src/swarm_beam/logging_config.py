"""
Logging Configuration

Centralized logging setup for experiment runs with file rotation,
colored console output, and timing helpers.
"""

import logging
import logging.handlers
import sys
import time
from pathlib import Path
from typing import Optional

LOG_FILE_NAME = "swarm-beam.log"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class ColoredFormatter(logging.Formatter):
    """Colored formatter for console output."""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[36m',    # Cyan
        'INFO': '\033[32m',     # Green
        'WARNING': '\033[33m',  # Yellow
        'ERROR': '\033[31m',    # Red
        'CRITICAL': '\033[35m', # Magenta
        'RESET': '\033[0m'
    }

    def format(self, record):
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        reset = self.COLORS['RESET']
        formatted = super().format(record)
        return formatted.replace(record.levelname, f"{color}{record.levelname}{reset}", 1)


def setup_logging(log_dir: Optional[Path] = None, log_level: str = "INFO") -> Optional[Path]:
    """
    Configure the root logger for one run.

    Console output goes to stderr so stdout stays free for results; the
    rotating file in ``log_dir`` always records DEBUG. Returns the log file
    path, if any.
    """
    log_file = None
    if log_dir:
        log_dir.mkdir(parents=True, exist_ok=True)
        log_file = log_dir / LOG_FILE_NAME

    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG if log_file else numeric_level)
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_format = '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'
    if sys.stderr.isatty():
        console_handler.setFormatter(ColoredFormatter(console_format, datefmt='%H:%M:%S'))
    else:
        console_handler.setFormatter(logging.Formatter(console_format, datefmt='%H:%M:%S'))
    root_logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))
        root_logger.addHandler(file_handler)

    # Reduce noise from some third-party libraries
    logging.getLogger('numba').setLevel(logging.WARNING)
    logging.getLogger('matplotlib').setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging initialized - Level: {log_level}")
    if log_file:
        logger.debug(f"Log file: {log_file}")
    return log_file


def shutdown_logging() -> None:
    """Flush and detach every root handler so log files can be moved or removed."""
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        handler.flush()
        root_logger.removeHandler(handler)
        handler.close()


def log_performance(logger: logging.Logger, operation: str, duration: float) -> None:
    """Log performance metrics."""
    logger.info(f"Performance | {operation} | {duration:.3f}s")


class LogContext:
    """Context manager for logging operations with timing."""

    def __init__(self, logger: logging.Logger, operation: str):
        self.logger = logger
        self.operation = operation
        self.start_time: Optional[float] = None
        self.duration = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.logger.debug(f"Starting {self.operation}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.duration = time.perf_counter() - self.start_time

        if exc_type is None:
            log_performance(self.logger, self.operation, self.duration)
        else:
            self.logger.error(f"Failed {self.operation} after {self.duration:.3f}s: {exc_val}")

        return False  # Don't suppress exceptions
