"""Trace, metrics and plot-data files.

Trace CSV layout: a schema line ``# circumnav-trace v1``, a header row with
the trace column names, then one row per sample. Floats are written with
``repr`` so a file round-trips bit-exactly. Column units:

    t [s]; px, py, ox, oy [m]; theta, phi [rad]; ovx, ovy [m/s];
    d, d_meas, alpha1 [m]; d_dot, alpha2 [m/s]; e [-]; e_dot, z [1/s];
    omega [rad/s]; saturated [0/1].

``alpha1``/``alpha2`` are empty when no filter runs. ``e`` and ``e_dot``
are the signals the controller used, so in range_only mode they come from
the measured range and the filter estimate.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .simulation import COLUMNS, SimTrace

TRACE_SCHEMA = "# circumnav-trace v1"

#: Plot-data kinds and the columns each one carries.
PLOT_KINDS = {
    "trajectory": ("t", "px", "py", "ox", "oy"),
    "relative_trajectory": ("t", "rel_x", "rel_y"),
    "error": ("t", "abs_range_error"),
    "control_input": ("t", "omega", "saturated"),
    "filter_estimates": ("t", "d", "alpha1", "d_dot", "alpha2"),
}

_PLOT_NOTES = {
    "trajectory": "vehicle (px, py) and target (ox, oy) positions [m]",
    "relative_trajectory": "vehicle position minus target position [m]",
    "error": "|d - r_d| [m]",
    "control_input": "commanded turn rate [rad/s]; saturated is 1 when clipped",
    "filter_estimates": "true range d and estimate alpha1 [m]; true rate d_dot and estimate alpha2 [m/s]",
}


def _cell(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def _write_table(path: Path, header, columns, comment=None):
    rows = zip(*(c.tolist() for c in columns))
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(comment + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(x) for x in row) + "\n")
    return path


def write_trace(trace: SimTrace, path) -> Path:
    path = Path(path)
    return _write_table(path, COLUMNS, [trace[c] for c in COLUMNS], TRACE_SCHEMA)


def read_trace(path) -> SimTrace:
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != TRACE_SCHEMA:
            raise InvalidInputError(f"{path}: not a trace file (schema line {first!r})")
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(x) if x else math.nan for x in line.rstrip("\n").split(",")]
                for line in fh if line.strip()]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return SimTrace({name: arr[:, i] for i, name in enumerate(header)})


def write_json(data: dict, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def plot_columns(trace: SimTrace, kind: str, r_d: float = None) -> dict:
    if kind not in PLOT_KINDS:
        raise InvalidInputError(f"unknown plot kind {kind!r}; expected one of {sorted(PLOT_KINDS)}")
    if kind == "relative_trajectory":
        return {"t": trace["t"], "rel_x": trace["px"] - trace["ox"],
                "rel_y": trace["py"] - trace["oy"]}
    if kind == "error":
        if r_d is None:
            raise InvalidInputError("error plot data needs r_d")
        return {"t": trace["t"], "abs_range_error": np.abs(trace["d"] - r_d)}
    return {name: trace[name] for name in PLOT_KINDS[kind]}


def emit_plot_data(trace: SimTrace, kind: str, directory, r_d: float = None) -> Path:
    """Write ``<kind>.csv`` into ``directory``; the first line documents the columns."""
    cols = plot_columns(trace, kind, r_d)
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return _write_table(directory / f"{kind}.csv", list(cols), list(cols.values()),
                        f"# {kind}: {_PLOT_NOTES[kind]}")
