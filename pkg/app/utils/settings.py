import json
import os

from app.utils.logger import get_logger

log = get_logger(__name__)

DEFAULT_SETTINGS = {
    "cache_dir": None,
    "workers": 1,
    "log_level": None,
    "default_format": "json",
}

CACHE_ENV_VAR = "REAL_ENUM_CACHE"


def get_settings_path():
    return os.path.join(os.path.expanduser("~"), ".realfloor_settings.json")


def load_user_settings(path=None):
    """Settings merged over the defaults; an unreadable file is ignored."""
    settings = dict(DEFAULT_SETTINGS)
    path = path or get_settings_path()
    try:
        if os.path.exists(path):
            with open(path, "r") as f:
                stored = json.load(f)
            if isinstance(stored, dict):
                settings.update({k: v for k, v in stored.items() if k in DEFAULT_SETTINGS})
            else:
                log.warning(f"⚠️ Ignoring settings file {path}: expected a JSON object")
    except Exception as e:
        log.warning(f"⚠️ Could not load settings: {e}")
    return settings


def save_user_settings(settings, path=None):
    path = path or get_settings_path()
    try:
        with open(path, "w") as f:
            json.dump({k: settings.get(k) for k in DEFAULT_SETTINGS}, f, indent=2)
        return True
    except Exception as e:
        log.error(f"❌ Could not save settings: {e}")
        return False


def resolve_cache_dir(override=None, settings=None):
    # option > environment > settings file > home default
    if override:
        return os.path.abspath(os.path.expanduser(override))
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return os.path.abspath(os.path.expanduser(env))
    settings = settings if settings is not None else load_user_settings()
    if settings.get("cache_dir"):
        return os.path.abspath(os.path.expanduser(settings["cache_dir"]))
    return os.path.join(os.path.expanduser("~"), ".realfloor_cache")


def resolve_workers(override=None, settings=None):
    if override is not None:
        return max(1, int(override))
    settings = settings if settings is not None else load_user_settings()
    try:
        return max(1, int(settings.get("workers") or 1))
    except (TypeError, ValueError):
        log.warning(f"⚠️ Invalid workers setting {settings.get('workers')!r}, using 1")
        return 1
