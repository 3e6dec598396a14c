"""CSV and manifest emission.

Numbers are written as the shortest decimal string that round-trips the
IEEE-754 double (Python's repr), so emitted files diff bit-exactly across
runs and platforms. Every emitted file is listed in manifest.json with its
content hash; the manifest also records the config hash, seed, tool
version, and every default the run relied on.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

from . import __version__
from .cache import canonical_key_text


def format_value(value) -> str:
    """Shortest round-trip decimal for floats; str() for everything else.

    Floats are first coerced to the builtin type so numpy scalars emit the
    bare number rather than their own repr.
    """
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, int):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows) -> Path:
    """Write a CSV with deterministic formatting and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    tmp = path.with_suffix(f".tmp.{os.getpid()}")
    tmp.write_text("\n".join(lines) + "\n", encoding="utf-8")
    os.replace(tmp, path)
    return path


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def config_hash(run_config) -> str:
    return hashlib.sha256(
        canonical_key_text(run_config.raw).encode("utf-8")).hexdigest()


def write_manifest(out_dir, files, run_config, seed) -> Path:
    """Emit manifest.json covering every file written by the run.

    files is a sequence of (path, schema) pairs; paths must live inside
    out_dir and exist already so their hashes can be recorded.
    """
    out_dir = Path(out_dir)
    records = {}
    path = out_dir / "manifest.json"
    chash = config_hash(run_config)
    # merge with a previous manifest from the same (config, seed, version) so
    # successive subcommands sharing an output directory stay fully listed
    if path.is_file():
        try:
            previous = json.loads(path.read_text(encoding="utf-8"))
        except ValueError:
            previous = None
        if (isinstance(previous, dict)
                and previous.get("config_hash") == chash
                and previous.get("seed") == seed
                and previous.get("tool_version") == __version__):
            for rec in previous.get("files", []):
                records[rec["name"]] = rec
    for file_path, schema in files:
        file_path = Path(file_path)
        records[file_path.name] = {
            "name": file_path.name,
            "schema": schema,
            "sha256": sha256_file(file_path),
        }
    manifest = {
        "tool_version": __version__,
        "config_hash": chash,
        "seed": seed,
        "defaults_used": list(run_config.defaults_used),
        "files": [records[k] for k in sorted(records)],
    }
    tmp = path.with_suffix(f".tmp.{os.getpid()}")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                   encoding="utf-8")
    os.replace(tmp, path)
    return path
