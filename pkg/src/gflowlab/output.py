"""Deterministic CSV / JSON / plot-script writers.

All floats are written with shortest round-trip ``repr`` so identical inputs
produce byte-identical files; JSON keys are sorted.
"""

from __future__ import annotations

import json
import math
import os
from typing import Mapping, Sequence

import numpy as np

CSV_SCHEMA = "gflowlab-csv v1"


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_csv(path: str, columns: Mapping[str, Sequence],
              meta: Mapping | None = None) -> None:
    """Write named columns with a schema line and ``# key=value`` metadata."""
    names = list(columns)
    arrays = [np.asarray(columns[c]) for c in names]
    length = arrays[0].shape[0]
    if any(a.shape[0] != length for a in arrays):
        raise ValueError("columns must share a length")
    lines = [f"# {CSV_SCHEMA}"]
    for key in sorted(meta or {}):
        lines.append(f"# {key}={_fmt((meta or {})[key])}")
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_fmt(a[i]) for a in arrays))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_csv(path: str):
    """Read back a write_csv file: (columns dict, meta dict)."""
    meta = {}
    names = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                body = line[2:]
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k] = v
                continue
            if names is None:
                names = line.split(",")
                continue
            rows.append(line.split(","))
    data = {}
    for j, name in enumerate(names or []):
        col = [r[j] for r in rows]
        try:
            data[name] = np.array([float(x) for x in col])
        except ValueError:
            data[name] = np.array(col)
    return data, meta


def _sanitize(obj):
    if isinstance(obj, dict):
        return {k: _sanitize(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _sanitize(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path: str, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(_sanitize(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plot_script(path: str, csv_name: str, x: str, ycols: Sequence[str],
                      title: str, logx: bool = False,
                      logy: bool = False) -> None:
    """Emit a plain gnuplot script referencing a CSV written by write_csv."""
    lines = [
        "# gnuplot script generated by gflowlab",
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'",
        f"set xlabel '{x}'",
    ]
    if logx:
        lines.append("set logscale x")
    if logy:
        lines.append("set logscale y")
    plots = ", ".join(
        f"'{csv_name}' using '{x}':'{y}' with lines" for y in ycols)
    lines.append(f"plot {plots}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def output_dir(cli_value: str | None) -> str:
    """Resolve the output directory: flag wins, then GFLOWLAB_OUTDIR, then ./out."""
    path = cli_value or os.environ.get("GFLOWLAB_OUTDIR") or "out"
    os.makedirs(path, exist_ok=True)
    return path
