"""Shared fixtures: reference curve data and independent naive oracles."""

from __future__ import annotations

import numpy as np
import pytest

from segsweep.types import BinaryMask, ProbabilityMap

# Reference operating curve from a prior evaluation run of the upstream
# ultrasound nerve model: aggregated Dice / IoU / pixel accuracy at five
# candidate thresholds. Used as replay input for the optimizer and report
# tests; the expected selections and means below were verified by hand.
REFERENCE_THRESHOLDS = (0.11, 0.12, 0.13, 0.14, 0.15)
REFERENCE_DICE = (0.7788, 0.7793, 0.7809, 0.7812, 0.7803)
REFERENCE_IOU = (0.6957, 0.6982, 0.7002, 0.7015, 0.7024)
REFERENCE_PIXACC = (0.9507, 0.9533, 0.9556, 0.9576, 0.9593)


def reference_csv_text(include_objective: bool = False) -> str:
    header = "threshold,dice,iou,pixel_accuracy"
    if include_objective:
        header += ",objective"
    lines = [header]
    for i, t in enumerate(REFERENCE_THRESHOLDS):
        row = f"{t:.6f},{REFERENCE_DICE[i]:.6f},{REFERENCE_IOU[i]:.6f},{REFERENCE_PIXACC[i]:.6f}"
        if include_objective:
            row += f",{REFERENCE_DICE[i]:.6f}"
        lines.append(row)
    return "\n".join(lines) + "\n"


def naive_confusion_from_probs(probs_rows, truth_rows, threshold):
    """Per-pixel double-loop confusion tally, straight from the definitions.

    Operates on plain nested lists so it shares nothing with the library
    implementation.
    """
    tp = fp = tn = fn = 0
    for prow, trow in zip(probs_rows, truth_rows):
        for p, g in zip(prow, trow):
            pred = p > threshold
            if pred and g:
                tp += 1
            elif pred and not g:
                fp += 1
            elif not pred and g:
                fn += 1
            else:
                tn += 1
    return tp, fp, tn, fn


def naive_confusion_from_masks(pred_rows, truth_rows):
    tp = fp = tn = fn = 0
    for prow, trow in zip(pred_rows, truth_rows):
        for p, g in zip(prow, trow):
            if p and g:
                tp += 1
            elif p and not g:
                fp += 1
            elif not p and g:
                fn += 1
            else:
                tn += 1
    return tp, fp, tn, fn


def naive_dice(tp, fp, fn):
    denom = 2 * tp + fp + fn
    return 1.0 if denom == 0 else 2 * tp / denom


def naive_iou(tp, fp, fn):
    denom = tp + fp + fn
    return 1.0 if denom == 0 else tp / denom


def naive_pixel_accuracy(tp, fp, tn, fn):
    return (tp + tn) / (tp + fp + tn + fn)


def naive_threshold_rescan(pmap: ProbabilityMap, truth: BinaryMask, thresholds):
    """Recompute confusion counts independently at each threshold (the slow
    path the prefix-count sweep must match bit for bit)."""
    vals = pmap.data.astype(np.float64)
    t = truth.data
    out = []
    for threshold in thresholds:
        pred = vals > threshold
        tp = int(np.count_nonzero(pred & t))
        fp = int(np.count_nonzero(pred & ~t))
        fn = int(np.count_nonzero(~pred & t))
        tn = int(t.size - tp - fp - fn)
        out.append((tp, fp, tn, fn))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240809)


def random_pair(rng, width=16, height=16):
    pmap = ProbabilityMap(rng.random((height, width), dtype=np.float64))
    truth = BinaryMask(rng.random((height, width)) < 0.5)
    return pmap, truth
