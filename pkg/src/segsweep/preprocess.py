"""Image preprocessing: resizing, normalization, mask binarization, and
seeded augmentation.

Geometric resampling uses half-pixel sample centers with edge-clamped reads.
Images interpolate bilinearly; masks use nearest-neighbor so they stay
strictly binary. Augmentation draws from a per-sample RNG substream keyed by
(seed, sample_index), so results do not depend on iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from segsweep.types import BinaryMask, check_same_shape


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Single-channel intensity grid, arbitrary range before normalization."""

    data: NDArray[np.float64]

    def __eq__(self, other):
        if other.__class__ is not GrayImage:
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash(self.data.tobytes())

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be a non-empty 2-D grid, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("image contains NaN or Inf")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        return int(self.data.shape[0])


@dataclass(frozen=True)
class AugmentationSpec:
    """Parameters of the seeded augmentation stream."""

    seed: int = 0
    rotation_degrees: float = 15.0
    hflip_probability: float = 0.5
    vflip_probability: float = 0.5
    intensity_shift: float = 0.1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        for name in ("hflip_probability", "vflip_probability"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        for name in ("rotation_degrees", "intensity_shift"):
            v = getattr(self, name)
            if v < 0:
                raise ValueError(f"{name} must be non-negative, got {v}")


def _sample_positions(n_src: int, n_dst: int) -> NDArray[np.float64]:
    # half-pixel centers, clamped so bilinear reads stay inside the source
    scale = n_src / n_dst
    pos = (np.arange(n_dst) + 0.5) * scale - 0.5
    return np.clip(pos, 0.0, n_src - 1.0)


def _bilinear_sample(data: NDArray[np.float64], ys, xs) -> NDArray[np.float64]:
    h, w = data.shape
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = ys - y0
    wx = xs - x0
    top = data[y0, x0] * (1.0 - wx) + data[y0, x1] * wx
    bot = data[y1, x0] * (1.0 - wx) + data[y1, x1] * wx
    return top * (1.0 - wy) + bot * wy


def resize_image(img: GrayImage, target_w: int, target_h: int) -> GrayImage:
    """Bilinear resize. Output range never exceeds the input range."""
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be positive, got {target_w}x{target_h}")
    xs = _sample_positions(img.width, target_w)
    ys = _sample_positions(img.height, target_h)
    gx, gy = np.meshgrid(xs, ys)
    return GrayImage(_bilinear_sample(img.data, gy, gx))


def resize_mask(mask: BinaryMask, target_w: int, target_h: int) -> BinaryMask:
    """Nearest-neighbor resize; preserves binarity by construction."""
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be positive, got {target_w}x{target_h}")
    xs = np.minimum(
        ((np.arange(target_w) + 0.5) * (mask.width / target_w)).astype(np.int64),
        mask.width - 1,
    )
    ys = np.minimum(
        ((np.arange(target_h) + 0.5) * (mask.height / target_h)).astype(np.int64),
        mask.height - 1,
    )
    return BinaryMask(mask.data[np.ix_(ys, xs)])


def normalize(img: GrayImage) -> GrayImage:
    """Min-max normalize to [0, 1]; constant images map to all zeros."""
    lo = float(img.data.min())
    hi = float(img.data.max())
    if hi == lo:
        return GrayImage(np.zeros_like(img.data))
    return GrayImage((img.data - lo) / (hi - lo))


def binarize_mask_image(img: GrayImage) -> BinaryMask:
    """Turn a grayscale mask image into a strict binary mask (normalized > 0.5)."""
    return BinaryMask(normalize(img).data > 0.5)


def _rotate_coords(w: int, h: int, degrees: float):
    # inverse-map output pixel centers back into the source frame
    theta = np.deg2rad(degrees)
    c, s = np.cos(theta), np.sin(theta)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    dx, dy = gx - cx, gy - cy
    src_x = c * dx + s * dy + cx
    src_y = -s * dx + c * dy + cy
    return np.clip(src_y, 0.0, h - 1.0), np.clip(src_x, 0.0, w - 1.0)


def rotate_image(img: GrayImage, degrees: float) -> GrayImage:
    """Rotate about the image center; bilinear with edge-clamped reads."""
    ys, xs = _rotate_coords(img.width, img.height, degrees)
    return GrayImage(_bilinear_sample(img.data, ys, xs))


def rotate_mask(mask: BinaryMask, degrees: float) -> BinaryMask:
    """Rotate about the center; nearest-neighbor keeps the mask binary."""
    ys, xs = _rotate_coords(mask.width, mask.height, degrees)
    yi = np.clip(np.rint(ys).astype(np.int64), 0, mask.height - 1)
    xi = np.clip(np.rint(xs).astype(np.int64), 0, mask.width - 1)
    return BinaryMask(mask.data[yi, xi])


def augment(
    img: GrayImage,
    mask: BinaryMask,
    spec: AugmentationSpec,
    sample_index: int,
) -> tuple[GrayImage, BinaryMask]:
    """Apply one seeded augmentation draw to an image/mask pair.

    Flips and rotation hit both; the intensity shift hits the image only and
    is clamped to [0, 1] (the image is expected to be normalized). The draw
    is a pure function of (spec.seed, sample_index): the same pair in, the
    same pair out, bit for bit.
    """
    check_same_shape(img, mask, "image/mask dimension mismatch")
    rng = np.random.default_rng((spec.seed, int(sample_index)))
    # fixed draw order keeps the stream stable regardless of which
    # transforms end up as no-ops
    do_hflip = rng.random() < spec.hflip_probability
    do_vflip = rng.random() < spec.vflip_probability
    angle = rng.uniform(-spec.rotation_degrees, spec.rotation_degrees)
    shift = rng.uniform(-spec.intensity_shift, spec.intensity_shift)

    img_data = img.data
    mask_data = mask.data
    if do_hflip:
        img_data = img_data[:, ::-1]
        mask_data = mask_data[:, ::-1]
    if do_vflip:
        img_data = img_data[::-1, :]
        mask_data = mask_data[::-1, :]
    out_img = GrayImage(img_data)
    out_mask = BinaryMask(mask_data)
    if angle != 0.0:
        out_img = rotate_image(out_img, angle)
        out_mask = rotate_mask(out_mask, angle)
    if shift != 0.0:
        out_img = GrayImage(np.clip(out_img.data + shift, 0.0, 1.0))
    return out_img, out_mask
