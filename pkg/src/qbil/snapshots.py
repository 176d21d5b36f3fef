"""Binary field snapshots.

Layout, little endian throughout:

    bytes 0-3    magic "QBIL"
    bytes 4-7    format version, u32 (currently 1)
    bytes 8-15   nx, u64
    bytes 16-23  ny, u64
    bytes 24-31  dx, f64
    bytes 32-39  dy, f64
    bytes 40-47  t,  f64
    bytes 48-    nx * ny complex samples, row-major over [iy, ix],
                 each as (re, im) f64 pairs

Readers validate the magic, the version, and the exact payload length and
report the byte offset where a truncated file ends.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import IoFormatError
from .solver import WaveField

MAGIC = b"QBIL"
VERSION = 1
_HEADER = struct.Struct("<4sIQQddd")


@dataclass
class SnapshotData:
    psi: np.ndarray
    t: float
    dx: float
    dy: float


def write_snapshot(path, field: WaveField, dx: float, dy: float) -> None:
    psi = np.asarray(field.psi, dtype=np.complex128)
    if psi.ndim != 2:
        raise IoFormatError(f"field must be 2-D, got shape {psi.shape}")
    ny, nx = psi.shape
    header = _HEADER.pack(MAGIC, VERSION, nx, ny, float(dx), float(dy),
                          float(field.t))
    flat = np.empty(2 * nx * ny, dtype="<f8")
    flat[0::2] = psi.real.ravel()
    flat[1::2] = psi.imag.ravel()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.tobytes())


def read_snapshot(path) -> SnapshotData:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise IoFormatError(
            f"snapshot truncated inside the header: file ends at byte "
            f"{len(blob)}, header needs {_HEADER.size}")
    magic, version, nx, ny, dx, dy, t = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise IoFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise IoFormatError(f"unsupported snapshot version {version}")
    expected = _HEADER.size + 16 * nx * ny
    if len(blob) != expected:
        raise IoFormatError(
            f"snapshot truncated: file ends at byte {len(blob)}, "
            f"expected {expected}")
    flat = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size)
    psi = (flat[0::2] + 1j * flat[1::2]).reshape(int(ny), int(nx))
    return SnapshotData(psi=psi, t=t, dx=dx, dy=dy)


class SnapshotRecorder:
    """evolve() recorder writing numbered snapshots at a fixed cadence."""

    def __init__(self, out_dir, dx: float, dy: float, cadence: int):
        if cadence < 1:
            raise IoFormatError("snapshot cadence must be >= 1")
        self.out_dir = out_dir
        self.dx = dx
        self.dy = dy
        self.cadence = cadence
        self.paths = []

    def observe(self, field: WaveField, potential, k: int):
        if k % self.cadence:
            return
        path = f"{self.out_dir}/field_{k:08d}.qbil"
        write_snapshot(path, field, self.dx, self.dy)
        self.paths.append(path)
