"""File emission with reproducible metadata headers.

Every emitted file starts with a metadata block (command, seed, version,
tolerances, and a timestamp unless suppressed); payloads are plain CSV rows
or a JSON object, byte-stable for a fixed seed.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

from . import __version__
from .tolerances import Tolerances


def metadata(command: str, seed: int, tol: Tolerances,
             deterministic: bool) -> dict:
    meta = {
        "command": command,
        "seed": seed,
        "version": __version__,
        "tolerances": tol.as_dict(),
    }
    if not deterministic:
        meta["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    return meta


def write_csv(path: str | Path, meta: dict, header: str, rows: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {key}: {json.dumps(val, sort_keys=True)}" for key, val in meta.items()]
    lines.append(header)
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_json(path: str | Path, meta: dict, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"meta": meta, **payload}
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
