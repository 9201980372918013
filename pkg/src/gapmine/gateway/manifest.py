"""Append-only JSON-lines run manifest; one row per completion."""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from pathlib import Path


class ManifestWriter:
    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, row: dict) -> None:
        stamped = {"timestamp": datetime.now(timezone.utc).isoformat(), **row}
        line = json.dumps(stamped, sort_keys=True, ensure_ascii=False)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


def read_manifest(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        return []
    rows = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            rows.append(json.loads(line))
    return rows
