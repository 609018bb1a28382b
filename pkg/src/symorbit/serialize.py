"""Deterministic JSON/CSV emission: every float printed with 17 significant digits."""

from __future__ import annotations

import json
import math

_MARK = "@~f17~@"  # sentinel stripped after encoding; never appears in payload strings


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _tag(obj):
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite value {obj} not serializable")
        return _MARK + fmt(obj) + _MARK
    if isinstance(obj, dict):
        return {k: _tag(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return _tag(obj.item())  # numpy scalars
    return obj


def dumps(obj, indent: int = 2) -> str:
    """json.dumps with floats rendered at fixed precision (sorted keys)."""
    text = json.dumps(_tag(obj), indent=indent, sort_keys=True)
    return text.replace('"' + _MARK, "").replace(_MARK + '"', "")


def dump(obj, path, indent: int = 2):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj, indent=indent) + "\n")


def write_csv(path, header: list[str], rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")
