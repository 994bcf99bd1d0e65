"""Full-grid threshold sweeps, macro aggregation, and optimum selection.

The per-image sweep never rescans pixels per threshold: probabilities are
partitioned by ground-truth class and sorted once, and every threshold's
confusion counts come from prefix counts in the sorted order
(O(N log N + n) per image instead of O(N * n)).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from segsweep import _kernels, metrics
from segsweep.errors import EmptyDatasetError
from segsweep.types import (
    BinaryMask,
    ConfusionCounts,
    MetricTriple,
    ObjectiveWeights,
    ProbabilityMap,
    ThresholdGrid,
    check_same_shape,
)

EMPTY_TRUTH_POLICIES = ("include", "exclude")

PostprocessFn = Callable[[BinaryMask], BinaryMask]


@dataclass(frozen=True, eq=False)
class PerImageCurve:
    """Confusion counts of one image at every grid threshold."""

    image_id: str
    grid: ThresholdGrid
    tp: NDArray[np.int64]
    fp: NDArray[np.int64]
    tn: NDArray[np.int64]
    fn: NDArray[np.int64]

    def __eq__(self, other):
        if other.__class__ is not PerImageCurve:
            return NotImplemented
        return (
            self.image_id == other.image_id
            and self.grid == other.grid
            and all(
                np.array_equal(getattr(self, f), getattr(other, f))
                for f in ("tp", "fp", "tn", "fn")
            )
        )

    def __hash__(self):
        return hash((self.image_id, self.grid, self.tp.tobytes()))

    def __post_init__(self):
        n = len(self.grid)
        for name in ("tp", "fp", "tn", "fn"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            if arr.shape != (n,):
                raise ValueError(f"{name} must have one entry per grid threshold")
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def counts_at(self, i: int) -> ConfusionCounts:
        return ConfusionCounts(
            tp=int(self.tp[i]), fp=int(self.fp[i]), tn=int(self.tn[i]), fn=int(self.fn[i])
        )

    @property
    def truth_foreground(self) -> int:
        """Ground-truth foreground pixel count (threshold-independent)."""
        return int(self.tp[0] + self.fn[0])

    @property
    def truth_empty(self) -> bool:
        return self.truth_foreground == 0


@dataclass(frozen=True)
class SweepResult:
    """Aggregated metrics, objective values, and the selected threshold."""

    grid: ThresholdGrid
    per_threshold: tuple[MetricTriple, ...]
    objectives: tuple[float, ...]
    optimal_threshold: float
    weights: ObjectiveWeights
    images_evaluated: int
    empty_truth_policy: str

    def __post_init__(self):
        n = len(self.grid)
        if len(self.per_threshold) != n or len(self.objectives) != n:
            raise ValueError("per_threshold and objectives must match the grid length")
        if self.empty_truth_policy not in EMPTY_TRUTH_POLICIES:
            raise ValueError(f"unknown empty-truth policy {self.empty_truth_policy!r}")
        for i, (triple, obj) in enumerate(zip(self.per_threshold, self.objectives)):
            if obj != objective(triple, self.weights):
                raise ValueError(f"objective at index {i} does not match its triple")
        idx = self.grid.index_of(self.optimal_threshold)
        if self.objectives[idx] != max(self.objectives):
            raise ValueError("optimal_threshold does not attain the maximum objective")

    @property
    def optimal_index(self) -> int:
        return self.grid.index_of(self.optimal_threshold)

    @property
    def optimal_triple(self) -> MetricTriple:
        return self.per_threshold[self.optimal_index]


def sweep_image(
    pmap: ProbabilityMap,
    truth: BinaryMask,
    grid: ThresholdGrid,
    image_id: str = "",
) -> PerImageCurve:
    """Confusion counts at every grid threshold, via one sort + prefix counts.

    Exactly equal to computing confusion(binarize(pmap, T), truth) at each T
    independently; the equivalence is pinned by tests against that oracle.
    """
    check_same_shape(pmap, truth, "map/truth dimension mismatch")
    # double precision so `value > T` matches binarize() exactly
    vals = pmap.data.astype(np.float64).reshape(-1)
    t = truth.data.reshape(-1)
    fg = np.sort(vals[t])
    bg = np.sort(vals[~t])
    n_fg, n_bg = fg.size, bg.size
    # count_le(v, T) = number of values <= T = pixels NOT predicted foreground
    fn = _kernels.count_le(fg, grid.values)
    tn = _kernels.count_le(bg, grid.values)
    return PerImageCurve(
        image_id=image_id,
        grid=grid,
        tp=n_fg - fn,
        fp=n_bg - tn,
        tn=tn,
        fn=fn,
    )


def sweep_image_postprocessed(
    pmap: ProbabilityMap,
    truth: BinaryMask,
    grid: ThresholdGrid,
    postprocess_fn: PostprocessFn,
    image_id: str = "",
) -> PerImageCurve:
    """Per-threshold counts with a mask transform between binarization and
    scoring. Morphology breaks the prefix-count shortcut, so this path
    rescans per threshold."""
    check_same_shape(pmap, truth, "map/truth dimension mismatch")
    n = len(grid)
    tp = np.empty(n, dtype=np.int64)
    fp = np.empty(n, dtype=np.int64)
    tn = np.empty(n, dtype=np.int64)
    fn = np.empty(n, dtype=np.int64)
    for i, t in enumerate(grid):
        pred = postprocess_fn(metrics.binarize(pmap, t))
        c = metrics.confusion(pred, truth)
        tp[i], fp[i], tn[i], fn[i] = c.tp, c.fp, c.tn, c.fn
    return PerImageCurve(image_id=image_id, grid=grid, tp=tp, fp=fp, tn=tn, fn=fn)


def aggregate(
    curves: Sequence[PerImageCurve],
    grid: ThresholdGrid,
    policy: str = "include",
) -> list[MetricTriple]:
    """Macro-average the per-image metrics at each grid threshold.

    Under policy="exclude", images with an empty ground-truth mask are
    dropped from the mean. Sums use math.fsum, so the result is independent
    of image order.
    """
    if policy not in EMPTY_TRUTH_POLICIES:
        raise ValueError(f"unknown empty-truth policy {policy!r}")
    if not curves:
        raise EmptyDatasetError("no images to aggregate")
    for c in curves:
        if not c.grid.same_grid(grid):
            raise ValueError(f"image {c.image_id!r} was swept on a different grid")
    kept = [c for c in curves if policy == "include" or not c.truth_empty]
    if not kept:
        raise EmptyDatasetError("empty-truth policy 'exclude' removed every image")
    out = []
    for i in range(len(grid)):
        triples = [metrics.metric_triple(c.counts_at(i)) for c in kept]
        out.append(
            MetricTriple(
                dice=math.fsum(t.dice for t in triples) / len(kept),
                iou=math.fsum(t.iou for t in triples) / len(kept),
                pixel_accuracy=math.fsum(t.pixel_accuracy for t in triples) / len(kept),
            )
        )
    return out


def objective(triple: MetricTriple, weights: ObjectiveWeights) -> float:
    """Weighted sum of the three metrics; in [0, 1] for normalized weights."""
    return (
        weights.lambda_dice * triple.dice
        + weights.lambda_iou * triple.iou
        + weights.lambda_pixacc * triple.pixel_accuracy
    )


def optimize(
    per_threshold: Sequence[MetricTriple],
    grid: ThresholdGrid,
    weights: ObjectiveWeights,
    *,
    images_evaluated: int = 0,
    empty_truth_policy: str = "include",
) -> SweepResult:
    """Select the grid threshold maximizing the weighted objective.

    Ties break toward the lowest threshold (more inclusive of faint
    foreground, and deterministic).
    """
    if len(per_threshold) != len(grid):
        raise ValueError(
            f"got {len(per_threshold)} metric triples for {len(grid)} thresholds"
        )
    objectives = tuple(objective(t, weights) for t in per_threshold)
    best = 0
    for i in range(1, len(objectives)):
        if objectives[i] > objectives[best]:
            best = i
    return SweepResult(
        grid=grid,
        per_threshold=tuple(per_threshold),
        objectives=objectives,
        optimal_threshold=grid[best],
        weights=weights,
        images_evaluated=images_evaluated,
        empty_truth_policy=empty_truth_policy,
    )


def sweep_dataset(
    dataset: Sequence[tuple[ProbabilityMap, BinaryMask]],
    grid: ThresholdGrid,
    *,
    image_ids: Optional[Sequence[str]] = None,
    workers: int = 1,
    postprocess_fn: Optional[PostprocessFn] = None,
) -> list[PerImageCurve]:
    """Sweep every image of a dataset, optionally across a thread pool.

    Images are independent; results are collected in dataset order, so the
    worker count never changes the output.
    """
    if not dataset:
        raise EmptyDatasetError("dataset is empty")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    ids = list(image_ids) if image_ids is not None else [str(i) for i in range(len(dataset))]
    if len(ids) != len(dataset):
        raise ValueError("image_ids must match the dataset length")

    def one(arg: tuple[str, tuple[ProbabilityMap, BinaryMask]]) -> PerImageCurve:
        image_id, (pmap, truth) = arg
        try:
            if postprocess_fn is None:
                return sweep_image(pmap, truth, grid, image_id=image_id)
            return sweep_image_postprocessed(
                pmap, truth, grid, postprocess_fn, image_id=image_id
            )
        except Exception as exc:
            raise RuntimeError(f"image {image_id!r}: {exc}") from exc

    items = list(zip(ids, dataset))
    if workers == 1:
        return [one(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, items))


def run_sweep(
    dataset: Sequence[tuple[ProbabilityMap, BinaryMask]],
    grid: ThresholdGrid,
    weights: ObjectiveWeights,
    policy: str = "include",
    *,
    image_ids: Optional[Sequence[str]] = None,
    workers: int = 1,
    postprocess_fn: Optional[PostprocessFn] = None,
) -> SweepResult:
    """End-to-end sweep: per-image curves, macro aggregation, optimum pick."""
    curves = sweep_dataset(
        dataset,
        grid,
        image_ids=image_ids,
        workers=workers,
        postprocess_fn=postprocess_fn,
    )
    kept = sum(1 for c in curves if policy == "include" or not c.truth_empty)
    per_threshold = aggregate(curves, grid, policy)
    return optimize(
        per_threshold,
        grid,
        weights,
        images_evaluated=kept,
        empty_truth_policy=policy,
    )
