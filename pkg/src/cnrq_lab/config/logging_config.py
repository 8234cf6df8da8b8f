import logging
import logging.handlers
import os
import sys
from typing import Optional, Dict

try:
    import colorlog
    COLOR_AVAILABLE = True
except ImportError:
    COLOR_AVAILABLE = False

LOG_FORMAT = "%(asctime)s|%(name)s|%(levelname)s|%(funcName)s:%(lineno)d > %(message)s"
LOG_FILE_NAME = "cnrq-lab.log"
LOG_MAX_BYTES = 1_048_576
LOG_BACKUPS = 5

DEFAULT_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}


def _find_project_root(start_dir: str) -> str:
    """Walk up from start_dir to the nearest directory holding pyproject.toml."""
    cur = os.path.abspath(start_dir)
    for _ in range(6):
        if os.path.exists(os.path.join(cur, "pyproject.toml")):
            return cur
        parent = os.path.dirname(cur)
        if parent == cur:
            break
        cur = parent
    return os.getcwd()


def _level_from_env(default: int) -> int:
    override = os.getenv("CNRQ_LOG_LEVEL")
    if not override:
        return default
    level = logging.getLevelName(override.upper())
    return level if isinstance(level, int) else default


def _console_formatter(use_colors: bool, log_colors: Dict[str, str]) -> logging.Formatter:
    if COLOR_AVAILABLE and use_colors and sys.stdout.isatty():
        return colorlog.ColoredFormatter(
            "%(log_color)s" + LOG_FORMAT,
            reset=True,
            log_colors=log_colors,
            style="%",
        )
    return logging.Formatter(LOG_FORMAT)


def configure_logging(
    name: str,
    use_colors: bool = True,
    console_level: int = logging.INFO,
    file_level: int = logging.INFO,
    custom_colors: Optional[Dict[str, str]] = None,
) -> logging.Logger:
    """Logger with a coloured console handler and a rotating file under <project>/logs."""
    console_level = _level_from_env(console_level)
    logger = logging.getLogger(name)
    logger.setLevel(min(console_level, file_level))
    logger.handlers.clear()

    log_dir = os.path.join(_find_project_root(os.path.dirname(__file__)), "logs")
    os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, LOG_FILE_NAME), maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUPS
    )
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    file_handler.setLevel(file_level)
    logger.addHandler(file_handler)

    stream_handler = logging.StreamHandler()
    stream_handler.setFormatter(_console_formatter(use_colors, custom_colors or DEFAULT_COLORS))
    stream_handler.setLevel(console_level)
    logger.addHandler(stream_handler)

    return logger
