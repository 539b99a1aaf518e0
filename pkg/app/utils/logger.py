import logging
import os
import sys

ROOT_LOGGER = "realfloor"
_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def get_logger(name):
    """Logger under the realfloor hierarchy (``app.core.floors`` -> ``realfloor.core.floors``)."""
    if name.startswith("app."):
        name = name[len("app."):]
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def resolve_level(debug=False, setting=None):
    if debug:
        return logging.DEBUG
    name = os.environ.get("REAL_ENUM_LOG_LEVEL") or setting or "WARNING"
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else logging.WARNING


def configure_logging(debug=False, setting=None):
    """Attach a single stderr handler to the package logger; stdout stays machine-readable."""
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(resolve_level(debug, setting))
    logger.propagate = False
    if debug:
        logger.debug("🛠️ Running in DEBUG MODE")
    return logger
