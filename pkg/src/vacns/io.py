"""Checkpoint files and the CSV report schemas.

Checkpoint layout (little-endian, fixed order, bit-exact round trip):

    magic    4 bytes  b"VCNS"
    version  uint32   1
    dim      uint32
    boundary uint32   0 = periodic, 1 = decay_box
    points   dim * uint32
    extent   dim * float64
    time     float64
    nfields  uint32
    then per field:
      name_len uint32, name utf-8 bytes,
      rank     uint32  (trailing component axes: 0 scalar, 1 vector, 2 tensor),
      data     float64, C order, shape points + (dim,) * rank

CSV files quote nothing, use one header line, and print floats with 17
significant digits so round trips preserve the double exactly.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .diagnostics import ConservedRecord, RegularityRecord
from .grid import Boundary, Grid
from .picard import PicardTrace
from .state import FluidState

_MAGIC = b"VCNS"
_VERSION = 1


def _fmt(x) -> str:
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def save_fields(path, grid: Grid, fields: dict[str, np.ndarray], time: float = 0.0) -> None:
    path = Path(path)
    bnd = 0 if grid.boundary == Boundary.PERIODIC else 1
    blob = bytearray()
    blob += _MAGIC
    blob += struct.pack("<III", _VERSION, grid.dim, bnd)
    blob += struct.pack(f"<{grid.dim}I", *grid.points)
    blob += struct.pack(f"<{grid.dim}d", *grid.extent)
    blob += struct.pack("<d", time)
    blob += struct.pack("<I", len(fields))
    for name, arr in fields.items():
        rank = arr.ndim - grid.dim
        expected = grid.shape + (grid.dim,) * rank
        if rank < 0 or arr.shape != expected:
            raise ValueError(f"field {name} has shape {arr.shape}, expected {expected}")
        encoded = name.encode("utf-8")
        blob += struct.pack("<I", len(encoded)) + encoded
        blob += struct.pack("<I", rank)
        blob += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    path.write_bytes(bytes(blob))


def load_fields(path) -> tuple[Grid, dict[str, np.ndarray], float]:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ValueError(f"{path} is not a field checkpoint")
    off = 4
    version, dim, bnd = struct.unpack_from("<III", raw, off)
    off += 12
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    points = struct.unpack_from(f"<{dim}I", raw, off)
    off += 4 * dim
    extent = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    (time,) = struct.unpack_from("<d", raw, off)
    off += 8
    (nfields,) = struct.unpack_from("<I", raw, off)
    off += 4
    grid = Grid(dim, points, extent,
                Boundary.PERIODIC if bnd == 0 else Boundary.DECAY_BOX)
    fields = {}
    for _ in range(nfields):
        (name_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        name = raw[off:off + name_len].decode("utf-8")
        off += name_len
        (rank,) = struct.unpack_from("<I", raw, off)
        off += 4
        shape = grid.shape + (dim,) * rank
        count = int(np.prod(shape))
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=off).reshape(shape)
        off += 8 * count
        fields[name] = arr.copy()
    return grid, fields, time


def save_state(path, state: FluidState) -> None:
    fields = {"c": state.c, "psi": state.psi, "u": state.u}
    if state.e is not None:
        fields["e"] = state.e
    save_fields(path, state.grid, fields, time=state.t)


def load_state(path) -> FluidState:
    grid, fields, time = load_fields(path)
    return FluidState(grid, fields["c"], fields["psi"], fields["u"],
                      fields.get("e"), t=time)


# -- CSV schemas -----------------------------------------------------------------


def write_conserved_csv(path, records: list[ConservedRecord], dim: int) -> None:
    cols = ["t", "m"] + [f"P{a + 1}" for a in range(dim)] + \
        ["E_k", "sup_u", "C0", "Cu", "ek_margin", "u_margin"]
    lines = [",".join(cols)]
    for r in records:
        row = [_fmt(r.t), _fmt(r.mass)]
        row += [_fmt(p) for p in np.atleast_1d(r.momentum)]
        row += [_fmt(r.e_kin), _fmt(r.sup_u), _fmt(r.c0_floor), _fmt(r.u_floor),
                _fmt(r.ek_margin), _fmt(r.u_margin)]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_regularity_csv(path, records: list[RegularityRecord]) -> None:
    cols = ["t", "c_h2", "psi_d1", "u_h2", "ct_h1", "psit_l2", "ut_l2",
            "u_d3_sq_time_integral", "blown_up"]
    lines = [",".join(cols)]
    for r in records:
        lines.append(",".join([
            _fmt(r.t), _fmt(r.c_h2), _fmt(r.psi_d1), _fmt(r.u_h2),
            _fmt(r.ct_h1), _fmt(r.psit_l2), _fmt(r.ut_l2),
            _fmt(r.u_d3_sq_time_integral), "1" if r.blown_up else "0"]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_audits_csv(path, rows: list[tuple[int, str, float]]) -> None:
    lines = ["corpus_size,audit,max_ratio"]
    for size, label, ratio in rows:
        lines.append(f"{size},{label},{_fmt(ratio)}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace_csv(path, traces: list[PicardTrace]) -> None:
    lines = ["window,iteration,gamma,wall_ms"]
    for w, tr in enumerate(traces):
        for i, gamma in enumerate(tr.gammas):
            lines.append(f"{w},{i + 1},{_fmt(gamma)},{_fmt(tr.wall_ms)}")
    Path(path).write_text("\n".join(lines) + "\n")
