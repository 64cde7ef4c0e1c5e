"""Report assembly: histograms, CSV/JSON rendering, atomic output directories.

Every artifact is rendered to exact bytes before anything touches disk, and
identical (inputs, config, seed) always produce identical bytes: floats are
serialized with Python's shortest round-trip repr, JSON keys are sorted, CSV
rows use "\\n" terminators, and no timestamps enter the report (they would
break reproducibility; run time is logged to the console instead).

Output directories are written atomically: files land in a temporary
sibling directory which is renamed into place only on success, so a failed
run never leaves a partial report behind.
"""

from __future__ import annotations

import io
import json
import os
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path
from collections.abc import Sequence


@dataclass(frozen=True)
class HistogramRow:
    low: float | None   # None = open underflow bound
    high: float | None  # None = open overflow bound
    count: int
    fraction: float


def emit_histogram(values: Sequence[float], edges: Sequence[float]) -> list[HistogramRow]:
    """Bin values into left-closed right-open bins over ``edges``.

    Always emits an underflow row (below the first edge) and an overflow row
    (at or above the last edge), so fractions sum to 1 whenever any values
    are present; with no values every fraction is 0.
    """
    edges = list(edges)
    if not edges:
        raise ValueError("empty edges")
    if any(a >= b for a, b in zip(edges, edges[1:])):
        raise ValueError("edges must be strictly increasing")
    counts = [0] * (len(edges) + 1)  # [underflow, bins..., overflow]
    for v in values:
        if v < edges[0]:
            counts[0] += 1
        elif v >= edges[-1]:
            counts[-1] += 1
        else:
            # Rightmost bin whose low edge is <= v.
            lo, hi = 0, len(edges) - 1
            while lo + 1 < hi:
                mid = (lo + hi) // 2
                if v < edges[mid]:
                    hi = mid
                else:
                    lo = mid
            counts[1 + lo] += 1
    n = len(values)
    rows = [HistogramRow(None, edges[0], counts[0], counts[0] / n if n else 0.0)]
    for i in range(len(edges) - 1):
        c = counts[1 + i]
        rows.append(HistogramRow(edges[i], edges[i + 1], c, c / n if n else 0.0))
    rows.append(HistogramRow(edges[-1], None, counts[-1], counts[-1] / n if n else 0.0))
    return rows


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # float() strips numpy scalar types
    return str(value)


def render_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Deterministic CSV: repr floats, empty cell for None, "\\n" line ends.

    Cells are plain numbers, identifiers, or class labels; anything
    containing a comma, quote, or newline is quoted the usual way.
    """
    out = io.StringIO()

    def write_row(cells):
        rendered = []
        for cell in cells:
            text = _cell(cell)
            if any(ch in text for ch in ',"\n\r'):
                text = '"' + text.replace('"', '""') + '"'
            rendered.append(text)
        out.write(",".join(rendered) + "\n")

    write_row(header)
    for row in rows:
        write_row(row)
    return out.getvalue()


def _plain(value):
    """Recursively coerce to plain JSON types; numpy scalars become floats/ints."""
    if value is None or isinstance(value, (bool, str)):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    raise TypeError(f"not JSON-serializable: {type(value).__name__}")


def render_json(payload: dict) -> str:
    """Canonical JSON bytes: sorted keys, two-space indent, no NaN/inf."""
    return json.dumps(_plain(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def histogram_json(rows: list[HistogramRow]) -> list[dict]:
    return [
        {"low": r.low, "high": r.high, "count": r.count, "fraction": r.fraction}
        for r in rows
    ]


def write_report_dir(files: dict[str, str], out_dir: str | Path) -> Path:
    """Write artifact files atomically into a fresh directory.

    The target must not already exist. Files are staged in a temporary
    sibling directory and renamed into place in one step.
    """
    out_dir = Path(out_dir)
    if out_dir.exists():
        raise FileExistsError(f"output directory already exists: {out_dir}")
    parent = out_dir.parent
    parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=parent, prefix=".staging-"))
    try:
        for name, content in sorted(files.items()):
            (staging / name).write_text(content, encoding="utf-8", newline="")
        os.rename(staging, out_dir)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return out_dir
