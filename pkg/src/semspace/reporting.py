"""Small shared helpers for deterministic report output."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Sequence


def dump_json(obj: Any) -> str:
    """Canonical JSON: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def fmt_value(v: Any) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, float):
        return f"{v:.6f}"
    if isinstance(v, (list, tuple)):
        return ", ".join(fmt_value(x) for x in v)
    return str(v)


def text_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Aligned-column plain-text table."""
    cells = [[fmt_value(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_mapping(mapping: dict, indent: int = 2) -> str:
    """Nested key/value listing used for aggregate sections."""
    pad = " " * indent
    lines = []
    for key in mapping:
        value = mapping[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.append(render_mapping(value, indent + 2))
        else:
            lines.append(f"{pad}{key}: {fmt_value(value)}")
    return "\n".join(lines)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
