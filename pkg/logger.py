"""
Logging configuration for the square-root diffusion laboratory
Provides centralized logging with consistent formatting
"""

import logging
import sys
from pathlib import Path
from datetime import datetime

from config import LOG_CONFIG


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for terminal output"""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[36m',      # Cyan
        'INFO': '\033[32m',       # Green
        'WARNING': '\033[33m',    # Yellow
        'ERROR': '\033[31m',      # Red
        'CRITICAL': '\033[35m',   # Magenta
    }
    RESET = '\033[0m'

    def format(self, record):
        # Color a copy so file handlers sharing the record stay plain
        record = logging.makeLogRecord(record.__dict__)
        if record.levelname in self.COLORS:
            record.levelname = (
                f"{self.COLORS[record.levelname]}"
                f"{record.levelname:8s}"
                f"{self.RESET}"
            )
        return super().format(record)


def _resolve_level(level):
    if level is None:
        level = LOG_CONFIG['level']
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level: {level}")
        return resolved
    return level


def setup_logger(
    name='sqd',
    level=None,
    log_to_file=False,
    log_dir='logs'
):
    """
    Setup and configure logger

    Args:
        name: Logger name
        level: Logging level name or number; defaults to LOG_CONFIG['level']
        log_to_file: Whether to also log to file
        log_dir: Directory for log files (if log_to_file=True)

    Returns:
        Configured logger instance
    """
    level = _resolve_level(level)
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Clear any existing handlers
    logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(level)
    console_handler.setFormatter(
        ColoredFormatter(LOG_CONFIG['format'], datefmt=LOG_CONFIG['datefmt'])
    )
    logger.addHandler(console_handler)

    if log_to_file:
        log_path = Path(log_dir)
        log_path.mkdir(parents=True, exist_ok=True)

        log_filename = log_path / f"{name}_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"

        file_handler = logging.FileHandler(log_filename, encoding='utf-8')
        file_handler.setLevel(level)
        file_handler.setFormatter(
            logging.Formatter(LOG_CONFIG['format'], datefmt=LOG_CONFIG['datefmt'])
        )
        logger.addHandler(file_handler)

        logger.info(f"Logging to file: {log_filename}")

    # Prevent propagation to root logger
    logger.propagate = False

    return logger


def get_logger(name='sqd'):
    """
    Get an existing logger or create a new one

    Args:
        name: Logger name

    Returns:
        Logger instance
    """
    logger = logging.getLogger(name)

    # If logger has no handlers, set it up with defaults
    if not logger.handlers:
        logger = setup_logger(name)

    return logger


def set_level(level):
    """Apply a level to every laboratory logger created so far"""
    level = _resolve_level(level)
    for name in MODULE_LOGGERS:
        logger = get_logger(name)
        logger.setLevel(level)
        for handler in logger.handlers:
            handler.setLevel(level)


MODULE_LOGGERS = (
    'sqd_specfun', 'sqd_model', 'sqd_simulate', 'sqd_bounds',
    'sqd_estimate', 'sqd_instability', 'sqd_cli',
)


def get_specfun_logger():
    """Get logger for special functions module"""
    return get_logger('sqd_specfun')


def get_model_logger():
    """Get logger for densities and moments module"""
    return get_logger('sqd_model')


def get_simulate_logger():
    """Get logger for simulation module"""
    return get_logger('sqd_simulate')


def get_bounds_logger():
    """Get logger for bound certification module"""
    return get_logger('sqd_bounds')


def get_estimate_logger():
    """Get logger for estimation module"""
    return get_logger('sqd_estimate')


def get_instability_logger():
    """Get logger for instability module"""
    return get_logger('sqd_instability')


def get_cli_logger():
    """Get logger for command-line driver"""
    return get_logger('sqd_cli')
