"""Batch inference over grayscale images, serialized as PMAP v1 files.

Each input image becomes one 256x256 probability map (sigmoid of the
single-channel logit) whose filename mirrors the input id, plus one
manifest row in the segsweep tab-separated schema
(``id<TAB>pmap_path<TAB>mask_path<TAB>split``).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import torch
from PIL import Image

from segsweep_adapter.model import build_model
from segsweep_adapter.pmap import write_pmap

TARGET_SIZE = 256  # uniform inference resolution
IMAGE_SUFFIXES = (".png", ".tif", ".tiff", ".bmp", ".jpg", ".jpeg")


@dataclass(frozen=True)
class AdapterConfig:
    image_dir: Path
    out_dir: Path
    checkpoint: Optional[Path] = None
    mask_dir: Optional[Path] = None
    device: str = "cpu"
    batch_size: int = 4

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


def load_image_tensor(path: Path) -> torch.Tensor:
    """Read a grayscale image into a (1, 256, 256) float tensor in [0, 1].

    Inputs of any size are resized here (bilinear) so a batch can be
    stacked; the single channel is replicated to three at inference time so
    the pretrained ResNet stem can consume it unchanged.
    """
    with Image.open(path) as img:
        if img.mode in ("I", "I;16"):
            arr = np.asarray(img, dtype=np.float64) / 65535.0
        else:
            arr = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
    tensor = torch.from_numpy(arr.astype(np.float32))[None, None]
    resized = torch.nn.functional.interpolate(
        tensor, size=(TARGET_SIZE, TARGET_SIZE), mode="bilinear", align_corners=False
    )
    return resized[0]


def _infer_batch(model: torch.nn.Module, batch: torch.Tensor, device: str) -> np.ndarray:
    with torch.no_grad():
        rgb = batch.repeat(1, 3, 1, 1).to(device)
        logits = model(rgb)["out"]
        probs = torch.sigmoid(logits).squeeze(1).cpu().numpy()
    return np.clip(probs, 0.0, 1.0)


def infer_and_dump(config: AdapterConfig) -> int:
    """Run the model over every image in ``config.image_dir``.

    Writes ``pmaps/<id>.pmap`` per input plus ``manifest.tsv``; failures are
    logged per file and reflected in the (nonzero) return code.
    """
    images = sorted(
        p
        for p in config.image_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        print(f"segsweep-adapter: no images under {config.image_dir}", file=sys.stderr)
        return 1

    model = build_model(config.checkpoint, config.device)
    out = config.out_dir
    (out / "pmaps").mkdir(parents=True, exist_ok=True)
    if config.mask_dir is not None:
        (out / "masks").mkdir(exist_ok=True)

    failures = 0
    rows: list[str] = []
    pending: list[tuple[str, torch.Tensor]] = []

    def flush():
        nonlocal failures
        if not pending:
            return
        ids = [image_id for image_id, _ in pending]
        batch = torch.stack([tensor for _, tensor in pending])
        pending.clear()
        try:
            probs = _infer_batch(model, batch, config.device)
        except Exception as exc:  # a whole batch failing fails each file
            for image_id in ids:
                print(f"segsweep-adapter: {image_id}: {exc}", file=sys.stderr)
            failures += len(ids)
            return
        for image_id, prob in zip(ids, probs):
            write_pmap(prob, out / "pmaps" / f"{image_id}.pmap")
            mask_rel = _mask_path(config, image_id)
            rows.append(f"{image_id}\tpmaps/{image_id}.pmap\t{mask_rel}\tunspecified")

    for path in images:
        image_id = path.stem
        try:
            pending.append((image_id, load_image_tensor(path)))
        except Exception as exc:
            print(f"segsweep-adapter: {image_id}: {exc}", file=sys.stderr)
            failures += 1
            continue
        if len(pending) == config.batch_size:
            flush()
    flush()

    manifest = out / "manifest.tsv"
    tmp = manifest.with_name(manifest.name + ".tmp")
    tmp.write_text("".join(row + "\n" for row in rows), encoding="utf-8")
    tmp.replace(manifest)
    print(f"segsweep-adapter: wrote {len(rows)} probability maps to {out}")
    return 1 if failures else 0


def _mask_path(config: AdapterConfig, image_id: str) -> str:
    """Manifest mask column: copy a provided ground-truth mask next to the
    maps (resized to the inference resolution, nearest-neighbor so it stays
    binary), else point at the conventional drop location."""
    rel = f"masks/{image_id}.png"
    if config.mask_dir is not None:
        for suffix in (".png", ".tif", ".tiff", ".bmp"):
            src = config.mask_dir / f"{image_id}{suffix}"
            if src.exists():
                with Image.open(src) as img:
                    arr = np.asarray(img.convert("L"))
                    resized = Image.fromarray(
                        np.where(arr != 0, 255, 0).astype(np.uint8), mode="L"
                    ).resize((TARGET_SIZE, TARGET_SIZE), Image.NEAREST)
                    resized.save(config.out_dir / rel, format="PNG")
                return rel
    return rel
