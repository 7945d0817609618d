"""Persistence: series CSV, spectral snapshots, and the run manifest.

The series file is plain comma-separated text with the fixed 16-column
header. Values are written with 17 significant digits so a write-read cycle
reproduces every float bit-for-bit. Snapshots keep the exact spectral
coefficients (good enough to restart from) in JSON next to a plain-text grid
rendering for quick inspection. The manifest is written atomically: a
half-written manifest never appears under its final name.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from . import spectral as sp
from .model import State
from .stepping import SERIES_COLUMNS, TimeSeries

__all__ = [
    "write_series",
    "read_series",
    "write_snapshot",
    "read_snapshot",
    "render_snapshot_text",
    "write_manifest",
    "write_json",
]


def write_series(series: TimeSeries, path: str) -> None:
    rows = len(series)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for i in range(rows):
            fh.write(",".join("%.17g" % series.data[c][i] for c in SERIES_COLUMNS) + "\n")


def read_series(path: str) -> TimeSeries:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split(",") != list(SERIES_COLUMNS):
            raise ValueError(f"{path}: header does not match the series schema")
        series = TimeSeries()
        for line_no, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(SERIES_COLUMNS):
                raise ValueError(f"{path}:{line_no}: expected {len(SERIES_COLUMNS)} columns")
            series.record(**{c: float(v) for c, v in zip(SERIES_COLUMNS, parts)})
    return series


def _field_payload(f) -> dict:
    return {"re": f.coeffs.real.tolist(), "im": f.coeffs.imag.tolist()}


def _field_from_payload(n_modes: int, payload: dict):
    arr = np.array(payload["re"], dtype=np.float64) + 1j * np.array(
        payload["im"], dtype=np.float64
    )
    return sp.SpectralField(n_modes, arr)


def write_snapshot(state: State, t: float, path: str) -> None:
    doc = {
        "t": t,
        "n_modes": state.n_modes,
        "m": _field_payload(state.m),
        "n": _field_payload(state.n),
    }
    write_json(doc, path)


def read_snapshot(path: str) -> tuple[float, State]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        n_modes = int(doc["n_modes"])
        state = State(
            _field_from_payload(n_modes, doc["m"]),
            _field_from_payload(n_modes, doc["n"]),
        )
        return float(doc["t"]), state
    except (KeyError, TypeError) as exc:
        raise ValueError(f"{path}: not a snapshot document ({exc})") from exc


def render_snapshot_text(state: State, t: float) -> str:
    """Grid-sampled view of both components, one line per grid point."""
    x = sp.grid_points(state.n_modes)
    mv = sp.to_grid(state.m).values
    nv = sp.to_grid(state.n).values
    lines = [f"# t = {t:.12g}", f"# n_modes = {state.n_modes}", "# x m n"]
    for xi, mi, ni in zip(x, mv, nv):
        lines.append("%.8f % .12e % .12e" % (xi, mi, ni))
    return "\n".join(lines) + "\n"


def write_json(doc: dict, path: str) -> None:
    """Serialize with sorted keys; the temp-then-replace dance keeps it atomic."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(doc: dict, path: str) -> None:
    write_json(doc, path)
