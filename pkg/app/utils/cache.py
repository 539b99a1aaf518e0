import hashlib
import json
import os
import tempfile

from app.core.tables import CONVENTION_VERSION, SCHEMA_VERSION
from app.utils.logger import get_logger

log = get_logger(__name__)


def result_key(surface, coords, operation, convention_version=CONVENTION_VERSION):
    """SHA-256 over (schema, surface, class, operation, convention version)."""
    payload = json.dumps(
        [SCHEMA_VERSION, str(surface), [int(c) for c in coords], str(operation), convention_version],
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def content_key(record):
    payload = json.dumps(record, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResultCache:
    """Directory of JSON records named by their content key."""

    def __init__(self, directory):
        self.directory = directory

    def _path(self, key):
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key):
        path = self._path(key)
        if not os.path.exists(path):
            return None
        try:
            with open(path, "r") as f:
                record = json.load(f)
            if not isinstance(record, dict):
                log.warning(f"⚠️ Ignoring cache record {path}: not a JSON object")
                return None
            log.info(f"📦 Using cached record {key[:12]}")
            return record
        except Exception as e:
            log.warning(f"⚠️ Ignoring unreadable cache record {path}: {e}")
            return None

    def put(self, key, record):
        os.makedirs(self.directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as f:
                json.dump(record, f, indent=2, sort_keys=True)
            os.replace(tmp, self._path(key))
        except Exception:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        log.info(f"💾 Cached record {key[:12]}")
        return self._path(key)

    def __contains__(self, key):
        return os.path.exists(self._path(key))

    def ls(self):
        if not os.path.isdir(self.directory):
            return []
        summaries = []
        for name in sorted(os.listdir(self.directory)):
            if not name.endswith(".json") or name.startswith(".tmp-"):
                continue
            key = name[: -len(".json")]
            record = self.get(key)
            if record is None:
                continue
            meta = record.get("meta")
            if not isinstance(meta, dict):
                meta = {}
            summaries.append({
                "key": key,
                "surface": meta.get("surface"),
                "kind": meta.get("kind"),
                "entries": len(record.get("entries", [])),
                "source": meta.get("source"),
            })
        return summaries

    def clear(self):
        if not os.path.isdir(self.directory):
            return 0
        removed = 0
        for name in os.listdir(self.directory):
            if name.endswith(".json"):
                os.remove(os.path.join(self.directory, name))
                removed += 1
        log.info(f"🧹 Cleared {removed} cache records from {self.directory}")
        return removed
