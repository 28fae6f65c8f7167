"""Persistent memoization of exact bracket values keyed by canonical keys.

A store is a thread-safe map from canonical key strings to exact rationals,
serializable as a single human-inspectable JSON file:

    {"schema": 1, "entries": {"g0:r=5:a=1,1,3,3": "1/5", ...}}

Save is atomic (write to a sibling temp file, then rename), so a crash mid
save never damages an existing valid file. Loading rejects unknown schema
versions and reports the offending entry on malformed content. Keys are
validated on ``put``: storing under a non-canonical key would make the same
bracket cacheable under several names, so it is a contract error.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from fractions import Fraction
from typing import Dict, Iterator, Optional, Tuple

from .core import CacheError, StructureError, format_rational, parse_key, parse_rational

__all__ = ["SCHEMA_VERSION", "CACHE_ENV_VAR", "CacheStore", "default_cache_path"]

SCHEMA_VERSION = 1
CACHE_ENV_VAR = "RSPIN_CACHE"


def default_cache_path() -> Optional[str]:
    """Cache file location from the environment, if configured."""
    path = os.environ.get(CACHE_ENV_VAR)
    return path if path else None


class CacheStore:
    """In-memory map of canonical key -> exact value, with file round-trip.

    Reads may run concurrently; mutation and save are serialized by an
    internal lock. ``dirty`` tracks whether the store has unsaved changes.
    """

    def __init__(self, entries: Optional[Dict[str, Fraction]] = None):
        self._entries: Dict[str, Fraction] = {}
        self._lock = threading.RLock()
        self.schema_version = SCHEMA_VERSION
        self.dirty = False
        if entries:
            for key, value in entries.items():
                self.put(key, value)
            self.dirty = False

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def items(self) -> Iterator[Tuple[str, Fraction]]:
        with self._lock:
            return iter(sorted(self._entries.items()))

    def get(self, key: str) -> Optional[Fraction]:
        return self._entries.get(key)

    def put(self, key: str, value) -> None:
        canonical = self._canonical_or_raise(key)
        with self._lock:
            self._entries[canonical] = Fraction(value)
            self.dirty = True

    @staticmethod
    def _canonical_or_raise(key: str) -> str:
        try:
            bracket = parse_key(key)
        except (StructureError, ValueError) as exc:
            raise CacheError(f"unusable cache key {key!r}: {exc}") from exc
        if bracket.key != key:
            raise CacheError(
                f"non-canonical cache key {key!r} (canonical form is {bracket.key!r})"
            )
        return key

    @classmethod
    def load(cls, path: str) -> "CacheStore":
        """Read a cache file, validating schema, keys, and value format."""
        with open(path, "r", encoding="utf-8") as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CacheError(f"malformed cache file {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise CacheError(f"malformed cache file {path}: top level must be an object")
        schema = payload.get("schema")
        if schema != SCHEMA_VERSION:
            raise CacheError(
                f"unsupported cache schema {schema!r} in {path} (expected {SCHEMA_VERSION})"
            )
        entries = payload.get("entries")
        if not isinstance(entries, dict):
            raise CacheError(f"malformed cache file {path}: 'entries' must be an object")
        store = cls()
        for key, raw in entries.items():
            if not isinstance(raw, str):
                raise CacheError(f"malformed cache file {path}: entry {key!r} is not a string")
            try:
                store.put(key, parse_rational(raw))
            except CacheError as exc:
                raise CacheError(f"{path}: entry {key!r}: {exc}") from exc
        store.dirty = False
        return store

    def save(self, path: str) -> None:
        """Write atomically: serialize to a sibling temp file, then rename."""
        with self._lock:
            payload = {
                "schema": self.schema_version,
                "entries": {
                    key: format_rational(value)
                    for key, value in sorted(self._entries.items())
                },
            }
            directory = os.path.dirname(os.path.abspath(path))
            fd, tmp_path = tempfile.mkstemp(
                prefix=os.path.basename(path) + ".", suffix=".tmp", dir=directory
            )
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as fh:
                    json.dump(payload, fh, indent=0, sort_keys=True)
                    fh.write("\n")
                os.replace(tmp_path, path)
            except BaseException:
                if os.path.exists(tmp_path):
                    os.unlink(tmp_path)
                raise
            self.dirty = False
