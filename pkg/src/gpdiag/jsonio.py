"""Small JSON output helpers: canonical dumps, hashing, atomic writes."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def config_hash(config: dict) -> str:
    return hashlib.sha256(
        json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def write_json_atomic(path, obj, provenance: dict | None = None) -> None:
    """Serialize obj (plus optional provenance block) via write-then-rename."""
    path = Path(path)
    if provenance is not None:
        obj = dict(obj)
        obj["provenance"] = provenance
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(canonical_dumps(obj) + "\n", encoding="utf-8")
    os.replace(tmp, path)
