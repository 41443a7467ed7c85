"""The WMH2 binary field dump.

Layout (little endian): ``b"WMH2"``, version u32, n u32, t_samples u32,
L f64, dt f64, flags u8 (bit 0 time-periodic, bit 1 tapered), then the complex
samples as interleaved f64 pairs in ``(t, i, j, k)`` order.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .grid import GridSpec, ScalarField3, SpacetimeField

MAGIC = b"WMH2"
VERSION = 1
_HEAD = struct.Struct("<4sIIIddB")


def write_dump(path, field, tapered: bool | None = None) -> Path:
    if isinstance(field, SpacetimeField):
        grid, data = field.grid, field.data
        tp = field.tapered if tapered is None else tapered
    elif isinstance(field, ScalarField3):
        grid, data, tp = field.grid, field.data[None], bool(tapered)
    else:
        raise TypeError("write_dump expects a ScalarField3 or SpacetimeField")
    flags = (1 if grid.time_periodic else 0) | (2 if tp else 0)
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, grid.n, data.shape[0], float(grid.length), float(grid.dt), flags))
        fh.write(np.ascontiguousarray(data, dtype="<c16").tobytes())
    return path


def read_dump(path) -> SpacetimeField:
    raw = Path(path).read_bytes()
    if len(raw) < _HEAD.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, n, nt, length, dt, flags = _HEAD.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported WMH2 version {version}")
    body = raw[_HEAD.size:]
    if len(body) != 16 * nt * n ** 3:
        raise ValueError(f"{path}: payload size {len(body)} does not match header")
    data = np.frombuffer(body, dtype="<c16").astype(np.complex128).reshape(nt, n, n, n)
    grid = GridSpec(n, length, nt, dt, bool(flags & 1))
    return SpacetimeField(data, grid, bool(flags & 2))
