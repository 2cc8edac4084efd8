"""Shared reader for the datasets the tacfermi CLI emits.

A dataset is a CSV whose first line is '# <json metadata>', followed by a
header row and numeric rows.  Rendering scripts validate the columns they
need before touching matplotlib and never recompute any physics.
"""

from __future__ import annotations

import json


class SchemaError(ValueError):
    pass


def read_dataset(path):
    """(columns: dict name -> list of floats, metadata: dict)."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].startswith("#"):
        raise SchemaError(f"{path}: missing '# {{json}}' metadata line")
    try:
        metadata = json.loads(lines[0][1:].strip())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: bad metadata JSON: {exc}") from exc
    if len(lines) < 2:
        raise SchemaError(f"{path}: missing header row")
    names = lines[1].split(",")
    columns = {name: [] for name in names}
    for ln in lines[2:]:
        if not ln:
            continue
        parts = ln.split(",")
        if len(parts) != len(names):
            raise SchemaError(f"{path}: ragged row '{ln}'")
        for name, tok in zip(names, parts):
            columns[name].append(float(tok))
    return columns, metadata


def require_columns(columns, needed, kind):
    missing = [c for c in needed if c not in columns]
    if missing:
        raise SchemaError(
            f"{kind} figure needs columns {list(needed)}; missing {missing}"
        )
