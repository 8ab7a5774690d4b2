"""Output plumbing: atomic file writes, CSV emission, run manifests.

Numbers are written with shortest round-trip float formatting so identical
inputs give byte-identical files; column names carry explicit units.
"""
from __future__ import annotations

import json
import os
from pathlib import Path

from . import __version__
from .errors import ConfigError


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_text_atomic(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
    return path


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return write_text_atomic(path, "\n".join(lines) + "\n")


def write_json(path: str | Path, payload: dict) -> Path:
    return write_text_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_manifest(out_dir: str | Path, subcommand: str, config_hash: str, seed: int) -> Path:
    payload = {
        "subcommand": subcommand,
        "config_sha256": config_hash,
        "seed": seed,
        "tool_version": __version__,
    }
    return write_json(Path(out_dir) / f"MANIFEST-{subcommand}.json", payload)


def read_csv(path: str | Path, required: list[str]) -> list[dict[str, str]]:
    """Header-checked CSV reader; returns one dict per row."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty CSV")
    header = [h.strip() for h in lines[0].split(",")]
    missing = [c for c in required if c not in header]
    if missing:
        raise ConfigError(f"{path}: missing required columns {missing}")
    rows = []
    for ln in lines[1:]:
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != len(header):
            raise ConfigError(f"{path}: row has {len(parts)} fields, header has {len(header)}")
        rows.append(dict(zip(header, parts)))
    return rows
