"""Append-only JSONL cache for factorizations and analysis records.

One JSON object per line, keyed by integer value for factorizations and by
(m, engine version) for analyses.  Later lines win on duplicate keys, so the
file can simply be appended to.  Writes are serialized by a lock; readers
see a dict snapshot loaded at construction.
"""

from __future__ import annotations

import json
import os
import threading

DEFAULT_CACHE_PATH = ".emcache.jsonl"
CACHE_PATH_ENV = "EM_CACHE_PATH"


def resolve_cache_path(explicit: str | None = None) -> str:
    if explicit:
        return explicit
    return os.environ.get(CACHE_PATH_ENV, DEFAULT_CACHE_PATH)


class ResultCache:
    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        self._data: dict[tuple[str, str], object] = {}
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    obj = json.loads(line)
                    self._data[(obj["kind"], obj["key"])] = obj["value"]

    def _put(self, kind: str, key: str, value) -> None:
        with self._lock:
            self._data[(kind, key)] = value
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"kind": kind, "key": key, "value": value}) + "\n")

    def get_factorization(self, n: int) -> list[tuple[int, int]] | None:
        raw = self._data.get(("factorization", str(n)))
        if raw is None:
            return None
        return [(int(p), int(e)) for p, e in raw]

    def put_factorization(self, n: int, factors) -> None:
        self._put("factorization", str(n), [[str(p), e] for p, e in factors])

    def get_analysis(self, m: int, version: str) -> dict | None:
        return self._data.get(("analysis", f"{m}:{version}"))

    def put_analysis(self, m: int, version: str, record: dict) -> None:
        self._put("analysis", f"{m}:{version}", record)
