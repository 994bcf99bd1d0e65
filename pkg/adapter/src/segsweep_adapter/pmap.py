"""PMAP v1 writer.

Wire format (little-endian): magic ``PMAP``, one version byte ``0x01``,
width and height as uint32 (13-byte header), then width*height float32
values, row-major from the top-left. This mirrors the segsweep toolkit's
on-disk interchange format; files written here must parse there bit for
bit.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

PMAP_MAGIC = b"PMAP"
PMAP_VERSION = 1
_HEADER = struct.Struct("<4sBII")


def pmap_bytes(values: np.ndarray) -> bytes:
    """Serialize a 2-D [0, 1] float array to PMAP v1 bytes."""
    arr = np.ascontiguousarray(values, dtype="<f4")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D array, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ValueError("probabilities contain NaN")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("probabilities outside [0, 1]")
    height, width = arr.shape
    return _HEADER.pack(PMAP_MAGIC, PMAP_VERSION, width, height) + arr.tobytes()


def write_pmap(values: np.ndarray, path: Path | str) -> None:
    """Write atomically (temp file plus rename)."""
    path = Path(path)
    payload = pmap_bytes(values)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
