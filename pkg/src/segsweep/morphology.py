"""Binary morphological post-processing for predicted masks.

Border convention: out-of-bounds pixels read as background, for erosion and
dilation alike, so an all-foreground mask erodes at its border and an empty
mask stays empty under dilation. Exact complement duality therefore needs
the erosion side to read out-of-bounds as foreground; ``erode`` exposes
``border_value`` for that:

    dilate(m, se) == complement(erode(complement(m), se, border_value=True))

which holds exactly for symmetric elements.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from segsweep import _kernels
from segsweep.types import BinaryMask

OPERATION_NAMES = ("erode", "dilate", "open", "close")


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Odd-sized boolean neighborhood pattern, anchored at its center."""

    data: NDArray[np.bool_]

    def __eq__(self, other):
        if other.__class__ is not StructuringElement:
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.data, dtype=bool))
        if arr.ndim != 2:
            raise ValueError("structuring element must be 2-D")
        h, w = arr.shape
        if h % 2 == 0 or w % 2 == 0:
            raise ValueError(f"structuring element dimensions must be odd, got {w}x{h}")
        if not arr.any():
            raise ValueError("structuring element must have at least one true cell")
        if not arr[h // 2, w // 2]:
            raise ValueError("structuring element anchor (center) must be true")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def is_symmetric(self) -> bool:
        """Point-symmetric about the anchor (required for exact duality)."""
        return bool(np.array_equal(self.data, self.data[::-1, ::-1]))

    @classmethod
    def cross3(cls) -> "StructuringElement":
        return cls(np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool))

    @classmethod
    def square3(cls) -> "StructuringElement":
        return cls(np.ones((3, 3), dtype=bool))

    @classmethod
    def named(cls, name: str) -> "StructuringElement":
        try:
            return {"cross3": cls.cross3, "square3": cls.square3}[name]()
        except KeyError:
            raise ValueError(f"unknown structuring element {name!r}") from None


def erode(mask: BinaryMask, se: StructuringElement, border_value: bool = False) -> BinaryMask:
    """Keep a pixel iff every true element cell centered there is foreground."""
    return BinaryMask(_kernels.erode(mask.data, se.data, border_value))


def dilate(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Set a pixel iff any true element cell centered there is foreground."""
    return BinaryMask(_kernels.dilate(mask.data, se.data))


def open_mask(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Erosion then dilation; removes speckle smaller than the element."""
    return dilate(erode(mask, se), se)


def close_mask(mask: BinaryMask, se: StructuringElement) -> BinaryMask:
    """Dilation then erosion; bridges gaps smaller than the element."""
    return erode(dilate(mask, se), se)


_OPERATIONS = {
    "erode": erode,
    "dilate": dilate,
    "open": open_mask,
    "close": close_mask,
}


def postprocess(
    mask: BinaryMask,
    se: StructuringElement | None = None,
    operations: Sequence[str] = ("open", "close"),
) -> BinaryMask:
    """Noise-reduction pipeline: open then close with the 3x3 cross by default."""
    if se is None:
        se = StructuringElement.cross3()
    out = mask
    for name in operations:
        if name not in _OPERATIONS:
            raise ValueError(f"unknown morphological operation {name!r}")
        out = _OPERATIONS[name](out, se)
    return out
