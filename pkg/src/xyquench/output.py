"""Deterministic CSV/JSON emission with atomic file replacement."""

from __future__ import annotations

import json
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Sequence

SCHEMA_VERSION = 1

TRACE_COLUMNS = ("t", "B", "gamma_k_raw", "gamma_k_mod")
TRACE_LONG_COLUMNS = ("tau_q",) + TRACE_COLUMNS
SWEEP_COLUMNS = ("tau_q", "kink_count", "density")


def fmt(x: Any) -> str:
    """Shortest round-trip text for numbers; locale independent."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    lines = [",".join(columns)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _plain(obj: Any) -> Any:
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalar
        return obj.item()
    return obj


def json_text(payload: dict) -> str:
    body = dict(payload)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(_plain(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write UTF-8 text with ``\\n`` endings via a temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path
