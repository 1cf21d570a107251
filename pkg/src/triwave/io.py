"""Binary field snapshots and CSV invariant series.

Snapshot layout (little-endian)::

    b"TRIW"  u16 version  u8 dim  u32 n  f64 L  f64 g1 g2 g3 omega  f64 c[dim]
    then u, v, w: each n^dim complex samples, row-major, interleaved (re, im) f64
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path

import numpy as np

from .grid import Grid
from .state import InvariantSet, Params, TriField

MAGIC = b"TRIW"
VERSION = 1
_HEAD = struct.Struct("<4sHBIdddd d")


class SnapshotError(ValueError):
    """Corrupt, truncated or unsupported snapshot file."""


def write_snapshot(path, field: TriField, params: Params) -> None:
    g = field.grid
    c = params.velocity(g)
    head = _HEAD.pack(MAGIC, VERSION, g.dim, g.n, g.half_width, params.gamma1, params.gamma2, params.gamma3, params.omega)
    body = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(np.asarray(c, dtype="<f8").tobytes())
        fh.write(body)


def read_snapshot(path) -> tuple[TriField, Params]:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, dim, n, L, g1, g2, g3, omega = _HEAD.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported snapshot version {version} (this reader handles {VERSION})")
    offset = _HEAD.size + 8 * dim
    expected = 3 * 2 * 8 * n**dim
    if len(raw) < offset or len(raw) - offset != expected:
        raise SnapshotError(f"{path}: payload is {len(raw) - offset} bytes, expected {expected}")
    try:
        grid = Grid(dim, n, L)
        c = np.frombuffer(raw, dtype="<f8", count=dim, offset=_HEAD.size)
        params = Params(g1, g2, g3, omega, tuple(c))
    except ValueError as exc:
        raise SnapshotError(f"{path}: corrupt header: {exc}") from exc
    data = np.frombuffer(raw, dtype="<c16", offset=offset).reshape((3,) + grid.shape)
    return TriField(grid, data.astype(complex)), params


def series_header(dim: int) -> list[str]:
    return ["t", "M", "M1", "M2", "M3", "K", "E"] + [f"P_{j + 1}" for j in range(dim)] + ["verdict"]


def write_series(path, times, series: list[InvariantSet], verdict: str) -> None:
    """One CSV row per sample time, floats with 17 significant digits."""
    if len(times) != len(series):
        raise ValueError("times and invariant series differ in length")
    dim = len(series[0].P) if series else 0
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(series_header(dim))
        for t, inv in zip(times, series):
            out.writerow(["%.17g" % x for x in (t, *inv.as_row())] + [verdict])


def write_trajectory(path, trajectory) -> None:
    write_series(path, trajectory.times, trajectory.invariant_series, trajectory.verdict)


def read_series(path) -> tuple[list[float], list[InvariantSet], str]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][:7] != ["t", "M", "M1", "M2", "M3", "K", "E"] or rows[0][-1] != "verdict":
        raise ValueError(f"{path}: not an invariant series (bad header)")
    dim = len(rows[0]) - 8
    times, series, verdict = [], [], ""
    for row in rows[1:]:
        if len(row) != len(rows[0]):
            raise ValueError(f"{path}: row has {len(row)} fields, expected {len(rows[0])}")
        vals = [float(x) for x in row[:-1]]
        if not all(math.isfinite(x) for x in vals):
            raise ValueError(f"{path}: non-finite entry")
        times.append(vals[0])
        series.append(InvariantSet(*vals[1:7], P=tuple(vals[7 : 7 + dim])))
        verdict = row[-1]
    return times, series, verdict


def write_table(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow(["%.17g" % x if isinstance(x, float) else x for x in row])
