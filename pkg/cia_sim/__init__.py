"""Cognitive interference alignment simulator for OFDM two-tiered networks."""
from __future__ import annotations

import logging
from pathlib import Path

import colorlog
import voluptuous as vol
import yaml

from .const import CONF_LOGGER, CONF_LOGGER_DEFAULT, CONF_LOGGER_LOGS, DOMAIN
from .exceptions import InvalidConfig

_LOGGER = logging.getLogger(__name__)

__version__ = "1.0.0"

LOG_LEVELS = ["CRITICAL", "FATAL", "ERROR", "WARNING", "WARN", "INFO", "DEBUG", "NOTSET"]
LOG_FORMAT = "%(log_color)s%(asctime)s %(levelname)-8s %(name)s: %(message)s"


def ensure_list(value):
    """Wrap a value in a list if it is not one already."""
    if value is None:
        return []
    return value if isinstance(value, list) else [value]


LOGGER_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_LOGGER_DEFAULT, default="warning"): vol.All(
            vol.Upper, vol.In(LOG_LEVELS)
        ),
        vol.Optional(CONF_LOGGER_LOGS, default={}): {
            str: vol.All(vol.Upper, vol.In(LOG_LEVELS))
        },
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(DOMAIN, default=[]): vol.All(ensure_list, [dict]),
        vol.Optional(CONF_LOGGER, default={}): LOGGER_SCHEMA,
    },
    extra=vol.ALLOW_EXTRA,
)


def load_configuration(path: str | Path) -> dict:
    """Load and validate a YAML configuration file."""
    try:
        raw = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as err:
        raise InvalidConfig(f"Could not read configuration {path}: {err}") from err
    try:
        return CONFIG_SCHEMA(raw)
    except vol.Invalid as err:
        raise InvalidConfig(str(err)) from err


def setup_logging(conf: dict | None = None) -> None:
    """Apply a logger block: a default level plus per-logger levels."""
    conf = LOGGER_SCHEMA(conf or {})

    handler = colorlog.StreamHandler()
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    root = logging.getLogger()
    for existing in list(root.handlers):
        if isinstance(existing.formatter, colorlog.ColoredFormatter):
            root.removeHandler(existing)
    root.addHandler(handler)
    root.setLevel(conf[CONF_LOGGER_DEFAULT])

    for name, level in conf[CONF_LOGGER_LOGS].items():
        logging.getLogger(name).setLevel(level)
    _LOGGER.debug("Logging configured: %s", conf)
