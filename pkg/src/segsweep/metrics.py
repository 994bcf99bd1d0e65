"""Binarization and the three evaluation metrics.

All metrics are computed from integer confusion counts and convert to float
only at the final division, so results are exactly reproducible across
platforms. When both prediction and ground truth are empty, Dice and IoU are
defined as 1.0: predicting "nothing" against an empty truth is a perfect
prediction (relevant for nerve-absent images).
"""

from __future__ import annotations

import numpy as np

from segsweep import _kernels
from segsweep.types import (
    BinaryMask,
    ConfusionCounts,
    MetricTriple,
    ProbabilityMap,
    check_same_shape,
)


def binarize(pmap: ProbabilityMap, threshold: float) -> BinaryMask:
    """Threshold a probability map: foreground iff probability > threshold.

    The inequality is strict, so threshold 1.0 yields an empty mask and a
    pixel exactly at the threshold is background. The comparison runs in
    double precision (float32 values promote losslessly).
    """
    t = float(threshold)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold!r}")
    return BinaryMask(pmap.data.astype(np.float64) > t)


def confusion(pred: BinaryMask, truth: BinaryMask) -> ConfusionCounts:
    """Pixel confusion tallies between a predicted and a ground-truth mask."""
    check_same_shape(pred, truth, "prediction/truth dimension mismatch")
    tp, fp, tn, fn = _kernels.confusion_counts(pred.data, truth.data)
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def dice(counts: ConfusionCounts) -> float:
    """Overlap score 2|P∩G| / (|P| + |G|); 1.0 when both masks are empty."""
    denom = 2 * counts.tp + counts.fp + counts.fn
    if denom == 0:
        return 1.0
    return (2 * counts.tp) / denom


def iou(counts: ConfusionCounts) -> float:
    """Intersection over union |P∩G| / |P∪G|; 1.0 when both masks are empty."""
    denom = counts.tp + counts.fp + counts.fn
    if denom == 0:
        return 1.0
    return counts.tp / denom


def pixel_accuracy(counts: ConfusionCounts) -> float:
    """Fraction of all pixels classified correctly."""
    if counts.total == 0:
        raise ValueError("pixel accuracy is undefined for zero pixels")
    return (counts.tp + counts.tn) / counts.total


def metric_triple(counts: ConfusionCounts) -> MetricTriple:
    return MetricTriple(
        dice=dice(counts), iou=iou(counts), pixel_accuracy=pixel_accuracy(counts)
    )


def evaluate_pair(pmap: ProbabilityMap, truth: BinaryMask, threshold: float) -> MetricTriple:
    """Binarize, tally confusion, and compute all three metrics in one call."""
    check_same_shape(pmap, truth, "map/truth dimension mismatch")
    return metric_triple(confusion(binarize(pmap, threshold), truth))
