"""Serialization: PMAP probability maps, mask image files, manifests, splits.

PMAP v1 wire format (little-endian):

    offset 0   4 bytes   magic "PMAP"
    offset 4   1 byte    format version, 0x01
    offset 5   4 bytes   width,  uint32
    offset 9   4 bytes   height, uint32
    offset 13  w*h*4     float32 values, row-major, top-left origin

Full float precision survives a round trip bit for bit; parse failures
report the byte offset of the problem.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from PIL import Image

from segsweep.errors import EmptyDatasetError, PmapFormatError, UnsupportedFormatError
from segsweep.preprocess import GrayImage
from segsweep.types import BinaryMask, EvaluationTag, ProbabilityMap, SPLIT_NAMES

PMAP_MAGIC = b"PMAP"
PMAP_VERSION = 1
_HEADER = struct.Struct("<4sBII")  # magic, version, width, height
PMAP_HEADER_SIZE = _HEADER.size  # 13


def atomic_write_bytes(path: Path | str, payload: bytes) -> None:
    """Write via a temp file plus rename so partial files never appear."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: Path | str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_pmap(pmap: ProbabilityMap, path: Path | str) -> None:
    header = _HEADER.pack(PMAP_MAGIC, PMAP_VERSION, pmap.width, pmap.height)
    payload = pmap.data.astype("<f4", copy=False).tobytes()
    atomic_write_bytes(path, header + payload)


def read_pmap(path: Path | str) -> ProbabilityMap:
    blob = Path(path).read_bytes()
    if len(blob) < PMAP_HEADER_SIZE:
        raise PmapFormatError("truncated header", offset=len(blob))
    magic, version, width, height = _HEADER.unpack_from(blob, 0)
    if magic != PMAP_MAGIC:
        raise PmapFormatError(f"bad magic {magic!r}", offset=0)
    if version != PMAP_VERSION:
        raise PmapFormatError(f"unsupported format version {version}", offset=4)
    if width == 0:
        raise PmapFormatError("zero width", offset=5)
    if height == 0:
        raise PmapFormatError("zero height", offset=9)
    expected = width * height * 4
    got = len(blob) - PMAP_HEADER_SIZE
    if got != expected:
        raise PmapFormatError(
            f"payload length mismatch: expected {expected} bytes, got {got}",
            offset=PMAP_HEADER_SIZE,
        )
    values = np.frombuffer(blob, dtype="<f4", offset=PMAP_HEADER_SIZE)
    bad = np.nonzero(np.isnan(values))[0]
    if bad.size:
        raise PmapFormatError(
            "NaN value", offset=PMAP_HEADER_SIZE + 4 * int(bad[0])
        )
    bad = np.nonzero((values < 0.0) | (values > 1.0))[0]
    if bad.size:
        i = int(bad[0])
        raise PmapFormatError(
            f"value {float(values[i])!r} outside [0, 1]",
            offset=PMAP_HEADER_SIZE + 4 * i,
        )
    return ProbabilityMap(values.reshape(height, width))


def write_mask(mask: BinaryMask, path: Path | str) -> None:
    """Store as an 8-bit single-channel image: background 0, foreground 255."""
    arr = np.where(mask.data, 255, 0).astype(np.uint8)
    img = Image.fromarray(arr, mode="L")
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            img.save(fh, format=_image_format_for(path))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _image_format_for(path: Path) -> str:
    ext = path.suffix.lower()
    return {".png": "PNG", ".tif": "TIFF", ".tiff": "TIFF", ".bmp": "BMP"}.get(ext, "PNG")


def read_mask(path: Path | str) -> BinaryMask:
    """Load an 8-bit single-channel mask image; any nonzero pixel is foreground."""
    with Image.open(path) as img:
        if img.mode != "L":
            raise UnsupportedFormatError(
                f"{path}: expected 8-bit single-channel grayscale, got mode {img.mode!r}"
            )
        arr = np.asarray(img, dtype=np.uint8)
    return BinaryMask(arr != 0)


def read_gray_image(path: Path | str) -> GrayImage:
    """Load a single-channel intensity image (8- or 16-bit, or float)."""
    with Image.open(path) as img:
        if img.mode not in ("L", "I", "I;16", "F"):
            raise UnsupportedFormatError(
                f"{path}: expected single-channel grayscale, got mode {img.mode!r}"
            )
        arr = np.asarray(img, dtype=np.float64)
    return GrayImage(arr)


def write_gray_image_u8(img: GrayImage, path: Path | str) -> None:
    """Store intensities scaled from [0, 1] to 8-bit."""
    arr = np.clip(np.rint(img.data * 255.0), 0, 255).astype(np.uint8)
    atomic = Image.fromarray(arr, mode="L")
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            atomic.save(fh, format=_image_format_for(path))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class ManifestRecord:
    image_id: str
    pmap_path: str
    mask_path: str
    split: str = "unspecified"
    epoch: Optional[int] = None

    def __post_init__(self):
        if not self.image_id or any(c in self.image_id for c in "\t\n"):
            raise ValueError(f"bad image id {self.image_id!r}")
        if self.split not in SPLIT_NAMES:
            raise ValueError(f"split must be one of {SPLIT_NAMES}, got {self.split!r}")

    @property
    def tag(self) -> EvaluationTag:
        return EvaluationTag(epoch=self.epoch, split=self.split)  # type: ignore[arg-type]


@dataclass(frozen=True)
class DatasetManifest:
    """Tab-separated record table: id, pmap path, mask path, split[, epoch]."""

    records: tuple[ManifestRecord, ...]

    def __post_init__(self):
        ids = [r.image_id for r in self.records]
        if len(set(ids)) != len(ids):
            dupe = next(i for i in ids if ids.count(i) > 1)
            raise ValueError(f"duplicate image id {dupe!r}")
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def ids(self) -> list[str]:
        return [r.image_id for r in self.records]

    def split_counts(self) -> dict[str, int]:
        out = {name: 0 for name in SPLIT_NAMES}
        for r in self.records:
            out[r.split] += 1
        return out

    def with_splits(self, assignment: dict[str, str]) -> "DatasetManifest":
        records = []
        for r in self.records:
            split = assignment.get(r.image_id, r.split)
            records.append(
                ManifestRecord(r.image_id, r.pmap_path, r.mask_path, split, r.epoch)
            )
        return DatasetManifest(tuple(records))

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            cols = [r.image_id, r.pmap_path, r.mask_path, r.split]
            if r.epoch is not None:
                cols.append(str(r.epoch))
            lines.append("\t".join(cols))
        return "\n".join(lines) + "\n"

    def save(self, path: Path | str) -> None:
        atomic_write_text(path, self.to_text())

    @classmethod
    def parse(cls, text: str) -> "DatasetManifest":
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            cols = line.split("\t")
            if len(cols) not in (4, 5):
                raise ValueError(
                    f"manifest line {lineno}: expected 4 or 5 tab-separated columns, "
                    f"got {len(cols)}"
                )
            epoch = int(cols[4]) if len(cols) == 5 else None
            records.append(ManifestRecord(cols[0], cols[1], cols[2], cols[3], epoch))
        return cls(tuple(records))

    @classmethod
    def load(cls, path: Path | str, root: Path | str | None = None) -> "DatasetManifest":
        """Parse the file and, when ``root`` is given, check every referenced
        pmap/mask exists under it."""
        manifest = cls.parse(Path(path).read_text(encoding="utf-8"))
        if root is not None:
            root = Path(root)
            for r in manifest.records:
                for rel in (r.pmap_path, r.mask_path):
                    if not (root / rel).exists():
                        raise FileNotFoundError(
                            f"manifest references missing file: {root / rel}"
                        )
        return manifest


def split_dataset(ids: Sequence[str], seed: int) -> dict[str, str]:
    """Assign train/validation/test splits in an 80:10:10 ratio.

    Ids are sorted, shuffled by a PRNG seeded with ``seed``, and cut with
    floor rounding (remainder to train). For n >= 3 every split receives at
    least one id. A pure function of (set of ids, seed): input order is
    irrelevant.
    """
    ids = list(ids)
    if not ids:
        raise EmptyDatasetError("cannot split an empty id list")
    if len(set(ids)) != len(ids):
        raise ValueError("image ids must be unique")
    ordered = sorted(ids)
    rng = np.random.default_rng(seed)
    shuffled = [ordered[i] for i in rng.permutation(len(ordered))]
    n = len(shuffled)
    n_val = n // 10
    n_test = n // 10
    if n >= 3:
        n_val = max(n_val, 1)
        n_test = max(n_test, 1)
    n_train = n - n_val - n_test
    assignment: dict[str, str] = {}
    for i, image_id in enumerate(shuffled):
        if i < n_train:
            assignment[image_id] = "train"
        elif i < n_train + n_val:
            assignment[image_id] = "validation"
        else:
            assignment[image_id] = "test"
    return assignment
