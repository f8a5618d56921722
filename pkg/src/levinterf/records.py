"""Self-describing CSV and JSON output."""

from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__

TOOL = f"levinterf {__version__}"


def _clean(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float):
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def write_json(path: str | Path, payload: dict, units: dict, flags=(), timestamp: bool = True) -> None:
    """JSON record; the ``_meta`` block plays the role of header comments."""
    meta = dict(tool=TOOL, units=units, conditional_flags=list(flags))
    if timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    doc = {"_meta": meta, **_clean(payload)}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _cell(v):
    if isinstance(v, np.generic):
        v = v.item()
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else v


def write_csv(path: str | Path, columns: list[str], rows, units: dict, flags=(),
              notes=()) -> None:
    """CSV with '#' header lines: tool version, column units, flags, free notes."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# {TOOL}\n")
        for c in columns:
            fh.write(f"# column {c}: {units.get(c, '')}\n")
        for f in flags:
            fh.write(f"# CONDITIONAL: {f}\n")
        for n in notes:
            fh.write(f"# {n}\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]
