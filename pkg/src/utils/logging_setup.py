"""
Logging configuration: colored console output plus a plain log file.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Union

import colorlog

from ..config.settings import settings

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
COLOR_FORMAT = "%(log_color)s%(asctime)s [%(levelname)s]%(reset)s %(name)s: %(message)s"

_configured = False


def configure_logging(level: Optional[str] = None, log_file: Optional[Union[str, Path]] = None) -> None:
    """Install the console and file handlers on the root logger (idempotent)."""
    global _configured
    root = logging.getLogger()
    root.setLevel(getattr(logging, (level or settings.log_level).upper(), logging.INFO))
    if _configured:
        return

    console = colorlog.StreamHandler(sys.stderr)
    console.setFormatter(
        colorlog.ColoredFormatter(
            COLOR_FORMAT,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
    )
    root.addHandler(console)

    path = Path(log_file or settings.log_file)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(path, encoding="utf-8")
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    except OSError as e:
        root.warning(f"File logging disabled: {e}")
    _configured = True
