"""Shared domain types for binary segmentation evaluation.

Pixel grids are row-major with the origin at the top left. All types are
immutable after construction (array payloads are marked read-only), so they
can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from segsweep.errors import ShapeMismatchError

SplitName = Literal["train", "validation", "test", "unspecified"]
SPLIT_NAMES: tuple[str, ...] = ("train", "validation", "test", "unspecified")


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _require_2d(arr: np.ndarray, what: str) -> None:
    if arr.ndim != 2:
        raise ValueError(f"{what} must be a 2-D pixel grid, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must have positive dimensions, got {arr.shape}")


class _ArrayEqualityMixin:
    """Value equality for frozen dataclasses whose payload is an ndarray."""

    def __eq__(self, other):
        if other.__class__ is not self.__class__:
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.__class__, self.data.tobytes()))


@dataclass(frozen=True, eq=False)
class ProbabilityMap(_ArrayEqualityMixin):
    """Per-pixel foreground probabilities in [0, 1].

    Stored as float32 (the wire precision of the PMAP format); validation
    happens here so downstream math never sees NaN or out-of-range values.
    """

    data: NDArray[np.float32]

    def __post_init__(self):
        raw = np.asarray(self.data)
        _require_2d(raw, "probability map")
        if np.isnan(raw).any():
            raise ValueError("probability map contains NaN")
        lo, hi = float(raw.min()), float(raw.max())
        if lo < 0.0 or hi > 1.0:
            bad = lo if lo < 0.0 else hi
            raise ValueError(f"probability {bad!r} outside [0, 1]")
        object.__setattr__(self, "data", _freeze(raw.astype(np.float32)))

    @classmethod
    def from_flat(cls, width: int, height: int, values: Sequence[float]) -> "ProbabilityMap":
        arr = np.asarray(values, dtype=np.float32)
        if arr.size != width * height:
            raise ValueError(
                f"expected {width * height} values for {width}x{height}, got {arr.size}"
            )
        return cls(arr.reshape(height, width))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def values(self) -> NDArray[np.float32]:
        """Row-major flat view of the pixel values."""
        return self.data.reshape(-1)


@dataclass(frozen=True, eq=False)
class BinaryMask(_ArrayEqualityMixin):
    """Per-pixel boolean foreground/background mask."""

    data: NDArray[np.bool_]

    def __post_init__(self):
        raw = np.asarray(self.data)
        _require_2d(raw, "mask")
        object.__setattr__(self, "data", _freeze(raw.astype(bool)))

    @classmethod
    def from_flat(cls, width: int, height: int, values: Sequence[bool]) -> "BinaryMask":
        arr = np.asarray(values, dtype=bool)
        if arr.size != width * height:
            raise ValueError(
                f"expected {width * height} values for {width}x{height}, got {arr.size}"
            )
        return cls(arr.reshape(height, width))

    @classmethod
    def empty(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.zeros((height, width), dtype=bool))

    @classmethod
    def full(cls, width: int, height: int) -> "BinaryMask":
        return cls(np.ones((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])

    @property
    def values(self) -> NDArray[np.bool_]:
        return self.data.reshape(-1)

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.data))


def complement(mask: BinaryMask) -> BinaryMask:
    """Invert foreground and background. Applying it twice is the identity."""
    return BinaryMask(~mask.data)


def check_same_shape(a, b, what: str = "dimension mismatch") -> None:
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(
            what, (a.width, a.height), (b.width, b.height)
        )


@dataclass(frozen=True)
class ConfusionCounts:
    """TP/FP/TN/FN pixel tallies for one prediction/ground-truth pair."""

    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class MetricTriple:
    """(Dice, IoU, Pixel Accuracy), each in [0, 1]."""

    dice: float
    iou: float
    pixel_accuracy: float

    def __post_init__(self):
        for name in ("dice", "iou", "pixel_accuracy"):
            v = float(getattr(self, name))
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weights of the threshold-selection objective.

    Stored normalized to sum 1 so objective values are comparable across
    runs; the argmax itself is invariant under positive scaling.
    """

    lambda_dice: float
    lambda_iou: float
    lambda_pixacc: float

    def __post_init__(self):
        vals = [float(self.lambda_dice), float(self.lambda_iou), float(self.lambda_pixacc)]
        if any(v < 0 or not np.isfinite(v) for v in vals):
            raise ValueError(f"weights must be finite and non-negative, got {vals}")
        total = vals[0] + vals[1] + vals[2]
        if total <= 0.0:
            raise ValueError("at least one weight must be strictly positive")
        for name, v in zip(("lambda_dice", "lambda_iou", "lambda_pixacc"), vals):
            object.__setattr__(self, name, v / total)

    @classmethod
    def equal(cls) -> "ObjectiveWeights":
        return cls(1.0, 1.0, 1.0)

    @classmethod
    def dice_only(cls) -> "ObjectiveWeights":
        return cls(1.0, 0.0, 0.0)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lambda_dice, self.lambda_iou, self.lambda_pixacc)


@dataclass(frozen=True, eq=False)
class ThresholdGrid:
    """Strictly increasing candidate thresholds, all within [0, 1]."""

    values: NDArray[np.float64]

    def __eq__(self, other):
        if other.__class__ is not ThresholdGrid:
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise ValueError("threshold grid must be non-empty")
        if np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("thresholds must lie in [0, 1]")
        if arr.size > 1 and not (np.diff(arr) > 0).all():
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "values", _freeze(arr))

    @classmethod
    def from_step(cls, start: float, stop: float, step: float) -> "ThresholdGrid":
        """Inclusive [start, stop] grid with the given step."""
        if step <= 0:
            raise ValueError(f"step must be positive, got {step}")
        if not start < stop:
            raise ValueError(f"need start < stop, got {start} >= {stop}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        # round to kill accumulation error so 0.11 + 3*0.01 == 0.14 exactly
        vals = np.round(start + step * np.arange(n), 12)
        return cls(vals)

    @classmethod
    def default(cls) -> "ThresholdGrid":
        return cls.from_step(0.01, 0.99, 0.01)

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])

    def index_of(self, threshold: float) -> int:
        idx = np.nonzero(self.values == threshold)[0]
        if idx.size == 0:
            raise ValueError(f"threshold {threshold} is not a grid point")
        return int(idx[0])

    def same_grid(self, other: "ThresholdGrid") -> bool:
        return bool(np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class EvaluationTag:
    """Descriptive metadata (training epoch, dataset split); never affects math."""

    epoch: Optional[int] = None
    split: SplitName = "unspecified"

    def __post_init__(self):
        if self.epoch is not None and (int(self.epoch) != self.epoch or self.epoch < 0):
            raise ValueError(f"epoch must be a non-negative integer, got {self.epoch!r}")
        if self.split not in SPLIT_NAMES:
            raise ValueError(f"split must be one of {SPLIT_NAMES}, got {self.split!r}")
