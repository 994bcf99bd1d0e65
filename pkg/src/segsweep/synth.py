"""Synthetic nerve-like masks and controllably degraded probability maps.

Masks are unions of elongated ellipses (or empty, mimicking nerve-absent
images). Probability maps start from the mask, get box-blurred and noised,
then pass through a monotone remap that pins the per-image Dice-optimal
operating point at a planted threshold. Every generated map is re-checked by
a brute-force per-threshold rescan, so the generator is safe to use as a
test oracle for the sweep engine: generation raises if the plant drifted by
more than one grid step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from segsweep.types import BinaryMask, ProbabilityMap, ThresholdGrid

_MASK_STREAM = 0
_PMAP_STREAM = 1


@dataclass(frozen=True)
class SynthSpec:
    """Knobs of the synthetic dataset generator."""

    seed: int = 0
    width: int = 256
    height: int = 256
    presence: float = 0.6
    blob_count: tuple[int, int] = (1, 3)
    blob_radius: tuple[float, float] = (6.0, 14.0)
    blur_radius: int = 1
    noise_amplitude: float = 0.08
    compression: float = 0.25
    plant_threshold: float = 0.30

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if not 0.0 <= self.presence <= 1.0:
            raise ValueError(f"presence must be in [0, 1], got {self.presence}")
        lo, hi = self.blob_count
        if lo < 1 or hi < lo:
            raise ValueError(f"bad blob count range {self.blob_count}")
        rlo, rhi = self.blob_radius
        if rlo <= 0 or rhi < rlo:
            raise ValueError(f"bad blob radius range {self.blob_radius}")
        if self.blur_radius < 0:
            raise ValueError("blur radius must be non-negative")
        if self.noise_amplitude < 0:
            raise ValueError("noise amplitude must be non-negative")
        if not 0.0 <= self.compression < 1.0:
            raise ValueError(f"compression must be in [0, 1), got {self.compression}")
        if not 0.01 <= self.plant_threshold <= 0.99:
            raise ValueError(
                f"plant threshold must be in [0.01, 0.99], got {self.plant_threshold}"
            )


def _rng(spec: SynthSpec, index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng((spec.seed, int(index), stream))


def _draw_ellipse(canvas: NDArray[np.bool_], rng: np.random.Generator, spec: SynthSpec) -> None:
    h, w = canvas.shape
    b = rng.uniform(*spec.blob_radius)
    a = b * rng.uniform(1.8, 3.2)  # elongated, like nerve cross-sections
    a = min(a, (min(w, h) - 4) / 2.0)
    b = min(b, a)
    theta = rng.uniform(0.0, np.pi)
    cx = rng.uniform(a + 1, w - 2 - a) if w - 3 > 2 * a else (w - 1) / 2.0
    cy = rng.uniform(a + 1, h - 2 - a) if h - 3 > 2 * a else (h - 1) / 2.0
    x0, x1 = max(0, int(cx - a) - 1), min(w, int(cx + a) + 2)
    y0, y1 = max(0, int(cy - a) - 1), min(h, int(cy + a) + 2)
    ys, xs = np.mgrid[y0:y1, x0:x1]
    dx = xs - cx
    dy = ys - cy
    u = (dx * np.cos(theta) + dy * np.sin(theta)) / a
    v = (-dx * np.sin(theta) + dy * np.cos(theta)) / b
    canvas[y0:y1, x0:x1] |= u * u + v * v <= 1.0


def gen_mask(spec: SynthSpec, index: int) -> BinaryMask:
    """Deterministic ground-truth mask for (spec.seed, index)."""
    rng = _rng(spec, index, _MASK_STREAM)
    canvas = np.zeros((spec.height, spec.width), dtype=bool)
    if rng.random() >= spec.presence:
        return BinaryMask(canvas)  # nerve-absent image
    count = int(rng.integers(spec.blob_count[0], spec.blob_count[1] + 1))
    for _ in range(count):
        _draw_ellipse(canvas, rng, spec)
    return BinaryMask(canvas)


def _box_blur(arr: NDArray[np.float64], radius: int) -> NDArray[np.float64]:
    """Separable box mean with zero padding; output stays within [0, 1]."""
    if radius <= 0:
        return arr
    k = 2 * radius + 1

    def along_rows(a: NDArray[np.float64]) -> NDArray[np.float64]:
        n = a.shape[0]
        padded = np.pad(a, ((radius, radius), (0, 0)))
        c = np.vstack([np.zeros((1, a.shape[1])), np.cumsum(padded, axis=0)])
        return (c[k : k + n] - c[0:n]) / k

    return along_rows(along_rows(arr).T).T


def _anchor_for_plant(values: NDArray[np.float64], truth: NDArray[np.bool_]) -> float:
    """Raw-value cut whose strict-> prediction maximizes Dice for this image.

    Returns the midpoint of the argmax plateau so the subsequent remap puts
    the planted threshold safely inside it.
    """
    flat = values.reshape(-1)
    t = truth.reshape(-1)
    distinct = np.unique(flat)
    fg = np.sort(flat[t])
    bg = np.sort(flat[~t])
    fn = np.searchsorted(fg, distinct, side="right")
    tp = fg.size - fn
    fp = bg.size - np.searchsorted(bg, distinct, side="right")
    denom = 2 * tp + fp + fn
    dice = np.where(denom == 0, 1.0, 2 * tp / np.maximum(denom, 1))
    k = int(np.argmax(dice))  # first max = lowest cut
    v_star = float(distinct[k])
    v_next = float(distinct[k + 1]) if k + 1 < distinct.size else 1.0
    anchor = (v_star + v_next) / 2.0
    return float(np.clip(anchor, 1e-6, 1.0 - 1e-6))


def _plant_remap(
    values: NDArray[np.float64], anchor: float, plant: float, compression: float
) -> NDArray[np.float64]:
    # monotone piecewise-linear map sending anchor -> plant, then a contraction
    # toward plant; preserves (value > anchor) <=> (output > plant)
    lower = values <= anchor
    out = np.where(
        lower,
        plant * (values / anchor),
        plant + (1.0 - plant) * (values - anchor) / (1.0 - anchor),
    )
    out = plant + (out - plant) * (1.0 - compression)
    return np.clip(out, 0.0, 1.0)


def _verify_plant(pmap: ProbabilityMap, truth: BinaryMask, spec: SynthSpec, index: int) -> None:
    """Brute-force rescan over the default grid: the planted threshold must
    attain the per-image Dice maximum within one grid step, else generation
    fails loudly."""
    grid = ThresholdGrid.default()
    step = 0.01
    vals = pmap.data.astype(np.float64)
    t = truth.data
    n_fg = int(np.count_nonzero(t))
    best = -1.0
    near = -1.0
    for threshold in grid:
        pred = vals > threshold
        tp = int(np.count_nonzero(pred & t))
        denom = 2 * tp + int(np.count_nonzero(pred ^ t))
        d = 1.0 if denom == 0 else 2 * tp / denom
        best = max(best, d)
        if abs(threshold - spec.plant_threshold) <= step + 1e-9:
            near = max(near, d)
    if near < best - 1e-12:
        raise RuntimeError(
            f"synthetic image {index}: planted threshold {spec.plant_threshold} "
            f"misses the Dice optimum ({near:.6f} < {best:.6f})"
        )
    del n_fg


def gen_probability_map(mask: BinaryMask, spec: SynthSpec, index: int) -> ProbabilityMap:
    """Degraded probability map whose Dice-optimal threshold is planted.

    Deterministic in (spec.seed, index). Degradation order: box blur, additive
    uniform noise, clamp, plant remap, contrast compression.
    """
    rng = _rng(spec, index, _PMAP_STREAM)
    base = mask.data.astype(np.float64)
    base = _box_blur(base, spec.blur_radius)
    if spec.noise_amplitude > 0:
        base = base + rng.uniform(
            -spec.noise_amplitude, spec.noise_amplitude, size=base.shape
        )
        base = np.clip(base, 0.0, 1.0)
    anchor = _anchor_for_plant(base, mask.data)
    planted = _plant_remap(base, anchor, spec.plant_threshold, spec.compression)
    pmap = ProbabilityMap(planted)
    _verify_plant(pmap, mask, spec, index)
    return pmap


def gen_pair(spec: SynthSpec, index: int) -> tuple[ProbabilityMap, BinaryMask]:
    mask = gen_mask(spec, index)
    return gen_probability_map(mask, spec, index), mask
