"""JSON and CSV report writers.

Reports never contain wall-clock times, so a fixed seed yields byte-identical
files across runs.  Floats are written at full double precision (repr), which
round-trips exactly.
"""

from __future__ import annotations

import json
import os

import numpy as np


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(payload), fh, indent=1, sort_keys=False)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    """Write rows of cells; floats are repr'ed for full precision."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [repr(float(c)) if isinstance(c, float) else str(c) for c in row]
            fh.write(",".join(cells) + "\n")
