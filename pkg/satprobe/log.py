# log.py
# -*- coding: utf-8 -*-
"""
Logging setup for satprobe.

Every module logs through ``logging.getLogger(__name__)``. Records are printed
with a bracketed component tag, e.g. ``[FISHER] Divergent QFI bound (eta=1)``.
"""

import logging
import os
from typing import Optional, Union

DEBUG = logging.DEBUG
INFO = logging.INFO
WARNING = logging.WARNING
ERROR = logging.ERROR

ROOT_LOGGER_NAME = "satprobe"

_TAGS = {
    "satprobe.special_fn": "SPECIAL",
    "satprobe.model": "MODEL",
    "satprobe.fisher": "FISHER",
    "satprobe.optimize": "OPTIMIZE",
    "satprobe.lindblad": "LINDBLAD",
    "satprobe.config": "CONFIG",
    "satprobe.io": "IO",
    "satprobe.cli": "CLI",
}


class TagFormatter(logging.Formatter):
    """Prefix each record with the component tag of the emitting module."""

    def format(self, record: logging.LogRecord) -> str:
        tag = _TAGS.get(record.name, record.name.rsplit(".", 1)[-1].upper())
        level = "" if record.levelno == logging.INFO else f"[{record.levelname}]"
        return f"[{tag}]{level} {record.getMessage()}"


def _root() -> logging.Logger:
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    if not any(getattr(h, "_satprobe", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(TagFormatter())
        handler._satprobe = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def set_log_level(level: Union[int, str]) -> None:
    """
    Set the level for every satprobe logger.

    :param level: A ``logging`` level number or name such as "INFO".
    """
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
        if not isinstance(level, int):
            raise ValueError(f"Unknown log level: {level}")
    _root().setLevel(level)


def set_log_file(path: Optional[str]) -> None:
    """
    Mirror log output into ``<path>/satprobe.log``. ``None`` disables the file.

    :param path: Directory that receives the log file.
    """
    logger = _root()
    for handler in list(logger.handlers):
        if isinstance(handler, logging.FileHandler):
            logger.removeHandler(handler)
            handler.close()
    if path is None:
        return
    os.makedirs(path, exist_ok=True)
    file_handler = logging.FileHandler(os.path.join(path, "satprobe.log"), encoding="utf-8")
    file_handler.setFormatter(TagFormatter())
    logger.addHandler(file_handler)


_root().setLevel(WARNING)
