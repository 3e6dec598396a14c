"""Content-addressed on-disk result cache.

Entries are JSON files named by the SHA-256 of their canonical key. A hit
requires a deep key comparison (a hash collision is treated as a miss), the
schema version must match, and corrupt files are quarantined rather than
trusted or deleted. Publication is atomic (write to a temp file, rename).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

CACHE_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CacheEntry:
    """One cached computation: canonical key, JSON-compatible value, and the
    schema version it was written under."""

    key: dict
    value: object
    schema_version: int = CACHE_SCHEMA_VERSION


def canonical_key_text(key: dict) -> str:
    """Deterministic serialization used both for hashing and deep compare."""
    return json.dumps(key, sort_keys=True, separators=(",", ":"))


def key_hash(key: dict) -> str:
    return hashlib.sha256(canonical_key_text(key).encode("utf-8")).hexdigest()


def entry_path(cache_dir, key: dict) -> Path:
    return Path(cache_dir) / f"{key_hash(key)}.json"


def cache_put(cache_dir, key: dict, value) -> Path:
    """Publish an entry atomically; last writer wins on races."""
    path = entry_path(cache_dir, key)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = json.dumps({
        "schema_version": CACHE_SCHEMA_VERSION,
        "key": key,
        "value": value,
    }, sort_keys=True)
    tmp = path.with_suffix(f".tmp.{os.getpid()}")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)
    return path


def cache_get(cache_dir, key: dict):
    """Return the cached value or None on any kind of miss.

    Misses: absent file, schema-version mismatch, deep-compare key mismatch
    (hash collision). A file that fails to parse is renamed to *.corrupt so
    it is inspectable but never consulted again.
    """
    path = entry_path(cache_dir, key)
    if not path.is_file():
        return None
    try:
        entry = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(entry, dict):
            raise ValueError("cache entry is not an object")
        version = entry["schema_version"]
        stored_key = entry["key"]
        value = entry["value"]
    except (ValueError, KeyError):
        quarantine = path.with_suffix(".corrupt")
        os.replace(path, quarantine)
        return None
    if version != CACHE_SCHEMA_VERSION:
        return None
    if canonical_key_text(stored_key) != canonical_key_text(key):
        return None
    return value
