"""Vectorized numpy implementations of the hot pixel kernels.

This backend is always available and is the reference the compiled core is
tested against. Both backends must produce identical integer results.
"""

from __future__ import annotations

import numpy as np


def confusion_counts(pred: np.ndarray, truth: np.ndarray) -> tuple[int, int, int, int]:
    """Tally (tp, fp, tn, fn) over two flat boolean arrays."""
    pred = pred.reshape(-1)
    truth = truth.reshape(-1)
    tp = int(np.count_nonzero(pred & truth))
    fp = int(np.count_nonzero(pred & ~truth))
    fn = int(np.count_nonzero(~pred & truth))
    tn = pred.size - tp - fp - fn
    return tp, fp, tn, fn


def count_le(sorted_vals: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Number of values <= T for each threshold T (both arrays ascending).

    ``sorted_vals`` must be float64 so the comparison happens in double
    precision, matching `value > threshold` binarization exactly.
    """
    return np.searchsorted(sorted_vals, thresholds, side="right").astype(np.int64)


def _se_offsets(se: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.nonzero(se)
    return ys, xs


def erode(mask: np.ndarray, se: np.ndarray, border_value: bool = False) -> np.ndarray:
    """Binary erosion; out-of-bounds pixels read as ``border_value``."""
    h, w = mask.shape
    ry, rx = se.shape[0] // 2, se.shape[1] // 2
    padded = np.pad(mask, ((ry, ry), (rx, rx)), constant_values=bool(border_value))
    out = np.ones((h, w), dtype=bool)
    for sy, sx in zip(*_se_offsets(se)):
        out &= padded[sy : sy + h, sx : sx + w]
    return out


def dilate(mask: np.ndarray, se: np.ndarray) -> np.ndarray:
    """Binary dilation; out-of-bounds pixels read as background."""
    h, w = mask.shape
    ry, rx = se.shape[0] // 2, se.shape[1] // 2
    padded = np.pad(mask, ((ry, ry), (rx, rx)), constant_values=False)
    out = np.zeros((h, w), dtype=bool)
    for sy, sx in zip(*_se_offsets(se)):
        out |= padded[sy : sy + h, sx : sx + w]
    return out
