"""
Logger setup shared by every worker class.

Each worker owns a named logger configured once: level and format from
``LoggingConfig``, a stderr stream handler (stdout carries CLI results) and,
when configured, a file handler under ``logs/``.
"""

import logging
import sys

from src.config import get_config
from src.utils.file_paths import get_log_path


def setup_logger(name: str) -> logging.Logger:
    """Return the named logger, attaching handlers on first use"""
    settings = get_config().logging
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, settings.level.upper(), logging.INFO))

    if not logger.handlers:
        formatter = logging.Formatter(settings.format)

        stream_handler = logging.StreamHandler(sys.stderr)
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)

        if settings.file_path:
            file_handler = logging.FileHandler(get_log_path(settings.file_path))
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        logger.propagate = False

    return logger
