"""Binary trajectory checkpoints with a JSON sidecar.

Layout (all fields in the byte order announced by the marker):

    offset  size  field
    0       8     magic b"EXPNLSCK"
    8       4     uint32 0x01020304 (byte-order marker)
    12      4     uint32 format version (1)
    16      8     uint64 n
    24      8     float64 L (half-width)
    32      8     float64 t
    40      8     float64 nu^2
    48      16n^2 payload: float64 pairs (re, im), row-major over (x1, x2)

The sidecar ``<path>.json`` holds the run configuration and provenance.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .errors import InvalidField
from .spectral import ComplexField, GridSpec

MAGIC = b"EXPNLSCK"
VERSION = 1
MARKER = 0x01020304
_HEADER = "8sIIQddd"
HEADER_SIZE = struct.calcsize("<" + _HEADER)


def sidecar_path(path: str | Path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def write_checkpoint(
    path: str | Path,
    field: ComplexField,
    t: float,
    nu_sq: float,
    metadata: dict[str, Any] | None = None,
    byteorder: str = "<",
) -> Path:
    if byteorder not in ("<", ">"):
        raise ValueError("byteorder must be '<' or '>'")
    n = field.grid.n
    header = struct.pack(byteorder + _HEADER, MAGIC, MARKER, VERSION, n, field.grid.half_width, float(t), float(nu_sq))
    payload = np.ascontiguousarray(field.values).view(np.float64).astype(byteorder + "f8", copy=False)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes(order="C"))
    side = {"format": "expnls-checkpoint", "version": VERSION, "n": n, "L": field.grid.half_width,
            "t": float(t), "nu_sq": float(nu_sq)}
    side.update(metadata or {})
    sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True))
    return path


def read_checkpoint(path: str | Path) -> tuple[ComplexField, dict[str, Any]]:
    """Return the field and a header dict (t, nu_sq, byteorder, sidecar contents if present)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < HEADER_SIZE or raw[:8] != MAGIC:
        raise InvalidField(f"{path} is not a checkpoint file")
    marker = raw[8:12]
    if marker == struct.pack("<I", MARKER):
        order = "<"
    elif marker == struct.pack(">I", MARKER):
        order = ">"
    else:
        raise InvalidField(f"{path}: unrecognized byte-order marker {marker!r}")
    _, _, version, n, L, t, nu_sq = struct.unpack(order + _HEADER, raw[:HEADER_SIZE])
    if version != VERSION:
        raise InvalidField(f"{path}: unsupported version {version}")
    expected = HEADER_SIZE + 16 * n * n
    if len(raw) != expected:
        raise InvalidField(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype=order + "f8", offset=HEADER_SIZE).astype(np.float64)
    values = data.view(np.complex128).reshape(n, n)
    grid = GridSpec(int(n), L)
    header: dict[str, Any] = {"t": t, "nu_sq": nu_sq, "byteorder": order, "version": version}
    side = sidecar_path(path)
    if side.exists():
        header["sidecar"] = json.loads(side.read_text())
    return ComplexField(grid, values), header
