"""Content-addressed JSON file cache, one file per key.

Writes are atomic (temp file + rename) so a failed request can never
leave a partial entry, and concurrent writers of the same key settle on
one complete file.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path


def digest_key(*parts) -> str:
    """Stable SHA-256 digest of a JSON-serializable tuple of parts."""
    blob = json.dumps(list(parts), sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FileCache:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put(self, key: str, value: dict) -> None:
        path = self._path(key)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(
            json.dumps(value, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )
        tmp.replace(path)

    def __contains__(self, key: str) -> bool:
        return self._path(key).exists()
