"""Command-line surface: evaluation, sweeps, optimization, data tooling.

One binary, subcommand style. Numeric output uses fixed 6-decimal
formatting so runs can be compared byte for byte; every command writes a
run manifest (effective config echo plus toolkit version) into its output
directory. Config precedence: CLI flags > --config file > defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path
from typing import Optional, Sequence

import segsweep
from segsweep import dataset_io, metrics, morphology, preprocess, sweep, synth
from segsweep.errors import EmptyDatasetError, SegsweepError
from segsweep.types import (
    BinaryMask,
    MetricTriple,
    ObjectiveWeights,
    ProbabilityMap,
    ThresholdGrid,
)

CSV_HEADER = "threshold,dice,iou,pixel_accuracy,objective"

DEFAULTS: dict = {
    "root": None,
    "manifest": None,
    "grid": "0.01:0.99:0.01",
    "threshold": None,
    "weights": "1,1,1",  # equal weights; a default, not a claim about any dataset
    "policy": "include",
    "postprocess": False,
    "se": "cross3",
    "post_ops": "open,close",
    "out": None,
    "seed": 0,
    "workers": 1,
    "from_csv": None,
    "n": 16,
    "size": "256x256",
    "presence": 0.6,
    "plant": 0.30,
    "blur_radius": 1,
    "noise": 0.08,
    "compression": 0.25,
    "augment": 0,
    "in_place": False,
}


@dataclass
class RunConfig:
    """Effective, validated configuration of one CLI run."""

    command: str
    root: Optional[Path] = None
    manifest: Optional[Path] = None
    grid: ThresholdGrid = field(default_factory=ThresholdGrid.default)
    grid_spec: str = DEFAULTS["grid"]
    threshold: Optional[float] = None
    weights: ObjectiveWeights = field(default_factory=ObjectiveWeights.equal)
    policy: str = "include"
    postprocess: bool = False
    se: str = "cross3"
    post_ops: tuple[str, ...] = ("open", "close")
    out: Optional[Path] = None
    seed: int = 0
    workers: int = 1
    from_csv: Optional[Path] = None
    n: int = 16
    size: tuple[int, int] = (256, 256)
    presence: float = 0.6
    plant: float = 0.30
    blur_radius: int = 1
    noise: float = 0.08
    compression: float = 0.25
    augment: int = 0
    in_place: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise ValueError(f"--workers must be >= 1, got {self.workers}")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"--threshold must be in [0, 1], got {self.threshold}")
        if self.policy not in sweep.EMPTY_TRUTH_POLICIES:
            raise ValueError(f"--policy must be include or exclude, got {self.policy!r}")
        morphology.StructuringElement.named(self.se)  # validates the name

    def echo(self) -> dict:
        return {
            "command": self.command,
            "root": str(self.root) if self.root else None,
            "manifest": str(self.manifest) if self.manifest else None,
            "grid": self.grid_spec,
            "threshold": self.threshold,
            "weights": [round(w, 6) for w in self.weights.as_tuple()],
            "policy": self.policy,
            "postprocess": self.postprocess,
            "se": self.se,
            "post_ops": list(self.post_ops),
            "out": str(self.out) if self.out else None,
            "seed": self.seed,
            "workers": self.workers,
            "from_csv": str(self.from_csv) if self.from_csv else None,
        }


def _parse_grid(spec: str) -> ThresholdGrid:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"--grid must look like start:stop:step, got {spec!r}")
    start, stop, step = (float(p) for p in parts)
    return ThresholdGrid.from_step(start, stop, step)


def _parse_weights(spec: str) -> ObjectiveWeights:
    parts = spec.split(",")
    if len(parts) != 3:
        raise ValueError(f"--weights must be three comma-separated numbers, got {spec!r}")
    d, i, p = (float(x) for x in parts)
    return ObjectiveWeights(d, i, p)


def _parse_size(spec: str) -> tuple[int, int]:
    parts = spec.lower().split("x")
    if len(parts) != 2:
        raise ValueError(f"--size must look like WxH, got {spec!r}")
    w, h = int(parts[0]), int(parts[1])
    if w < 1 or h < 1:
        raise ValueError(f"--size dimensions must be positive, got {spec!r}")
    return w, h


def _merge_config(args: argparse.Namespace) -> RunConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        unknown = set(file_values) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config file keys: {sorted(unknown)}")
        merged.update(file_values)
    for key in DEFAULTS:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            merged[key] = cli_value

    root = Path(merged["root"]) if merged["root"] else None
    manifest = Path(merged["manifest"]) if merged["manifest"] else None
    if manifest is None and root is not None:
        manifest = root / "manifest.tsv"
    return RunConfig(
        command=args.command,
        root=root,
        manifest=manifest,
        grid=_parse_grid(str(merged["grid"])),
        grid_spec=str(merged["grid"]),
        threshold=None if merged["threshold"] is None else float(merged["threshold"]),
        weights=_parse_weights(str(merged["weights"])),
        policy=str(merged["policy"]),
        postprocess=bool(merged["postprocess"]),
        se=str(merged["se"]),
        post_ops=tuple(str(merged["post_ops"]).split(",")),
        out=Path(merged["out"]) if merged["out"] else None,
        seed=int(merged["seed"]),
        workers=int(merged["workers"]),
        from_csv=Path(merged["from_csv"]) if merged["from_csv"] else None,
        n=int(merged["n"]),
        size=_parse_size(str(merged["size"])),
        presence=float(merged["presence"]),
        plant=float(merged["plant"]),
        blur_radius=int(merged["blur_radius"]),
        noise=float(merged["noise"]),
        compression=float(merged["compression"]),
        augment=int(merged["augment"]),
        in_place=bool(merged["in_place"]),
    )


def _require(cfg: RunConfig, *names: str) -> None:
    for name in names:
        if getattr(cfg, name) is None:
            raise ValueError(f"--{name.replace('_', '-')} is required for {cfg.command}")


def _write_run_manifest(cfg: RunConfig, out: Path) -> None:
    payload = {"tool": "segsweep", "version": segsweep.__version__, "config": cfg.echo()}
    dataset_io.atomic_write_text(out / "run_manifest.json", _json_text(payload))


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _postprocess_fn(cfg: RunConfig):
    if not cfg.postprocess:
        return None
    se = morphology.StructuringElement.named(cfg.se)
    return lambda mask: morphology.postprocess(mask, se, cfg.post_ops)


def _load_dataset(cfg: RunConfig):
    _require(cfg, "root", "manifest")
    manifest = dataset_io.DatasetManifest.load(cfg.manifest, root=cfg.root)
    if len(manifest) == 0:
        raise EmptyDatasetError(f"manifest {cfg.manifest} lists no images")
    ids, pairs = [], []
    for record in manifest:
        try:
            pmap = dataset_io.read_pmap(cfg.root / record.pmap_path)
            mask = dataset_io.read_mask(cfg.root / record.mask_path)
        except (OSError, SegsweepError) as exc:
            raise RuntimeError(f"image {record.image_id!r}: {exc}") from exc
        ids.append(record.image_id)
        pairs.append((pmap, mask))
    return ids, pairs


def _load_curve_csv(path: Path) -> tuple[ThresholdGrid, list[MetricTriple]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty CSV")
        expected = CSV_HEADER.split(",")
        if [h.strip() for h in header] not in (expected, expected[:4]):
            raise ValueError(
                f"{path}: header must be {CSV_HEADER!r} (objective column optional)"
            )
        thresholds, triples = [], []
        for row in reader:
            if not row:
                continue
            thresholds.append(float(row[0]))
            triples.append(
                MetricTriple(
                    dice=float(row[1]), iou=float(row[2]), pixel_accuracy=float(row[3])
                )
            )
    if not thresholds:
        raise EmptyDatasetError(f"{path}: no data rows")
    return ThresholdGrid(thresholds), triples


def _curve_csv_text(result: sweep.SweepResult) -> str:
    lines = [CSV_HEADER]
    for t, triple, obj in zip(result.grid, result.per_threshold, result.objectives):
        lines.append(
            f"{t:.6f},{triple.dice:.6f},{triple.iou:.6f},"
            f"{triple.pixel_accuracy:.6f},{obj:.6f}"
        )
    return "\n".join(lines) + "\n"


def _sweep_json_text(result: sweep.SweepResult) -> str:
    best = result.optimal_triple
    payload = {
        "optimal_threshold": round(result.optimal_threshold, 6),
        "mean_dice": round(best.dice, 6),
        "mean_iou": round(best.iou, 6),
        "mean_pixel_accuracy": round(best.pixel_accuracy, 6),
        "weights": [round(w, 6) for w in result.weights.as_tuple()],
        "n_images": result.images_evaluated if result.images_evaluated else None,
        "policy": result.empty_truth_policy,
        "curve": [
            {
                "threshold": round(t, 6),
                "dice": round(triple.dice, 6),
                "iou": round(triple.iou, 6),
                "pixel_accuracy": round(triple.pixel_accuracy, 6),
                "objective": round(obj, 6),
            }
            for t, triple, obj in zip(result.grid, result.per_threshold, result.objectives)
        ],
    }
    return _json_text(payload)


def _sweep_result(cfg: RunConfig) -> sweep.SweepResult:
    if cfg.from_csv is not None:
        grid, triples = _load_curve_csv(cfg.from_csv)
        return sweep.optimize(
            triples, grid, cfg.weights, images_evaluated=0, empty_truth_policy=cfg.policy
        )
    ids, pairs = _load_dataset(cfg)
    return sweep.run_sweep(
        pairs,
        cfg.grid,
        cfg.weights,
        cfg.policy,
        image_ids=ids,
        workers=cfg.workers,
        postprocess_fn=_postprocess_fn(cfg),
    )


def cmd_sweep(cfg: RunConfig) -> int:
    result = _sweep_result(cfg)
    print(f"T* = {result.optimal_threshold:.6f}")
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        dataset_io.atomic_write_text(cfg.out / "curve.csv", _curve_csv_text(result))
        dataset_io.atomic_write_text(cfg.out / "sweep.json", _sweep_json_text(result))
        _write_run_manifest(cfg, cfg.out)
    return 0


def cmd_optimize(cfg: RunConfig) -> int:
    result = _sweep_result(cfg)
    print(f"T* = {result.optimal_threshold:.6f}")
    print("threshold objective")
    for t, obj in zip(result.grid, result.objectives):
        print(f"{t:.6f} {obj:.6f}")
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        dataset_io.atomic_write_text(cfg.out / "curve.csv", _curve_csv_text(result))
        dataset_io.atomic_write_text(cfg.out / "sweep.json", _sweep_json_text(result))
        _write_run_manifest(cfg, cfg.out)
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    if cfg.threshold is None:
        raise ValueError("--threshold is required for eval")
    if cfg.from_csv is not None:
        grid, triples = _load_curve_csv(cfg.from_csv)
        matches = [i for i, t in enumerate(grid) if abs(t - cfg.threshold) < 1e-12]
        if not matches:
            raise ValueError(f"threshold {cfg.threshold} not present in {cfg.from_csv}")
        triple = triples[matches[0]]
        n_images: Optional[int] = None
        per_image_rows: list[tuple[str, MetricTriple]] = []
    else:
        ids, pairs = _load_dataset(cfg)
        postprocess_fn = _postprocess_fn(cfg)
        per_image_rows = []
        included = []
        for image_id, (pmap, mask) in zip(ids, pairs):
            try:
                pred = metrics.binarize(pmap, cfg.threshold)
                if postprocess_fn is not None:
                    pred = postprocess_fn(pred)
                triple = metrics.metric_triple(metrics.confusion(pred, mask))
            except (SegsweepError, ValueError) as exc:
                raise RuntimeError(f"image {image_id!r}: {exc}") from exc
            per_image_rows.append((image_id, triple))
            if cfg.policy == "include" or mask.foreground_count() > 0:
                included.append(triple)
        if not included:
            raise EmptyDatasetError("empty-truth policy 'exclude' removed every image")
        n_images = len(included)
        triple = MetricTriple(
            dice=fsum(t.dice for t in included) / n_images,
            iou=fsum(t.iou for t in included) / n_images,
            pixel_accuracy=fsum(t.pixel_accuracy for t in included) / n_images,
        )

    print(
        f"threshold {cfg.threshold:.6f}: dice {triple.dice:.6f} "
        f"iou {triple.iou:.6f} pixel_accuracy {triple.pixel_accuracy:.6f}"
    )
    if cfg.out is not None:
        cfg.out.mkdir(parents=True, exist_ok=True)
        summary = {
            "threshold": round(cfg.threshold, 6),
            "mean_dice": round(triple.dice, 6),
            "mean_iou": round(triple.iou, 6),
            "mean_pixel_accuracy": round(triple.pixel_accuracy, 6),
            "n_images": n_images,
            "policy": cfg.policy,
        }
        dataset_io.atomic_write_text(cfg.out / "summary.json", _json_text(summary))
        lines = ["image_id,dice,iou,pixel_accuracy"]
        for image_id, t in per_image_rows:
            lines.append(
                f"{image_id},{t.dice:.6f},{t.iou:.6f},{t.pixel_accuracy:.6f}"
            )
        dataset_io.atomic_write_text(cfg.out / "per_image.csv", "\n".join(lines) + "\n")
        _write_run_manifest(cfg, cfg.out)
    return 0


def cmd_synth(cfg: RunConfig) -> int:
    _require(cfg, "out")
    if cfg.n < 1:
        raise ValueError(f"--n must be >= 1, got {cfg.n}")
    spec = synth.SynthSpec(
        seed=cfg.seed,
        width=cfg.size[0],
        height=cfg.size[1],
        presence=cfg.presence,
        blur_radius=cfg.blur_radius,
        noise_amplitude=cfg.noise,
        compression=cfg.compression,
        plant_threshold=cfg.plant,
    )
    out = cfg.out
    (out / "pmaps").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    width = len(str(cfg.n - 1))
    records = []
    for index in range(cfg.n):
        image_id = f"img{index:0{max(width, 4)}d}"
        pmap, mask = synth.gen_pair(spec, index)
        dataset_io.write_pmap(pmap, out / "pmaps" / f"{image_id}.pmap")
        dataset_io.write_mask(mask, out / "masks" / f"{image_id}.png")
        records.append(
            dataset_io.ManifestRecord(
                image_id, f"pmaps/{image_id}.pmap", f"masks/{image_id}.png"
            )
        )
    dataset_io.DatasetManifest(tuple(records)).save(out / "manifest.tsv")
    sidecar = [
        f"plant_threshold={spec.plant_threshold}",
        f"seed={spec.seed}",
        f"n={cfg.n}",
        f"width={spec.width}",
        f"height={spec.height}",
        f"presence={spec.presence}",
        f"blur_radius={spec.blur_radius}",
        f"noise_amplitude={spec.noise_amplitude}",
        f"compression={spec.compression}",
    ]
    dataset_io.atomic_write_text(out / "plant.txt", "\n".join(sidecar) + "\n")
    _write_run_manifest(cfg, out)
    print(f"wrote {cfg.n} image pairs to {out}")
    return 0


def cmd_split(cfg: RunConfig) -> int:
    _require(cfg, "root", "manifest")
    manifest = dataset_io.DatasetManifest.load(cfg.manifest, root=cfg.root)
    assignment = dataset_io.split_dataset(manifest.ids(), cfg.seed)
    updated = manifest.with_splits(assignment)
    updated.save(cfg.manifest)
    counts = updated.split_counts()
    print(
        f"train {counts['train']} / validation {counts['validation']} "
        f"/ test {counts['test']}"
    )
    out = cfg.out if cfg.out is not None else cfg.manifest.parent
    out.mkdir(parents=True, exist_ok=True)
    _write_run_manifest(cfg, out)
    return 0


def cmd_preprocess(cfg: RunConfig) -> int:
    _require(cfg, "root", "out")
    images_dir = cfg.root / "images"
    masks_dir = cfg.root / "masks"
    if not images_dir.is_dir() or not masks_dir.is_dir():
        raise ValueError(f"{cfg.root} must contain images/ and masks/ directories")
    target_w, target_h = cfg.size
    out = cfg.out
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)
    aug_spec = preprocess.AugmentationSpec(seed=cfg.seed)
    records = []
    image_files = sorted(p for p in images_dir.iterdir() if p.is_file())
    if not image_files:
        raise EmptyDatasetError(f"no image files under {images_dir}")
    ordinal = 0
    for path in image_files:
        image_id = path.stem
        mask_path = _find_mask(masks_dir, image_id)
        img = dataset_io.read_gray_image(path)
        mask = dataset_io.read_mask(mask_path)
        img = preprocess.normalize(
            preprocess.resize_image(img, target_w, target_h)
        )
        mask = preprocess.resize_mask(mask, target_w, target_h)
        variants = [(image_id, img, mask)]
        for k in range(cfg.augment):
            aug_img, aug_mask = preprocess.augment(
                img, mask, aug_spec, ordinal * max(cfg.augment, 1) + k
            )
            variants.append((f"{image_id}-aug{k}", aug_img, aug_mask))
        for vid, vimg, vmask in variants:
            dataset_io.write_pmap(
                ProbabilityMap(vimg.data), out / "images" / f"{vid}.pmap"
            )
            dataset_io.write_mask(vmask, out / "masks" / f"{vid}.png")
            records.append(
                dataset_io.ManifestRecord(vid, f"images/{vid}.pmap", f"masks/{vid}.png")
            )
        ordinal += 1
    dataset_io.DatasetManifest(tuple(records)).save(out / "manifest.tsv")
    _write_run_manifest(cfg, out)
    print(f"preprocessed {ordinal} pairs into {out}")
    return 0


def _find_mask(masks_dir: Path, image_id: str) -> Path:
    for ext in (".png", ".tif", ".tiff", ".bmp"):
        candidate = masks_dir / f"{image_id}{ext}"
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"no mask found for {image_id!r} under {masks_dir}")


def cmd_postprocess(cfg: RunConfig) -> int:
    _require(cfg, "root", "out")
    se = morphology.StructuringElement.named(cfg.se)
    mask_files = sorted(
        p
        for p in cfg.root.iterdir()
        if p.is_file() and p.suffix.lower() in (".png", ".tif", ".tiff", ".bmp")
    )
    if not mask_files:
        raise EmptyDatasetError(f"no mask files under {cfg.root}")
    cfg.out.mkdir(parents=True, exist_ok=True)
    for path in mask_files:
        mask = dataset_io.read_mask(path)
        cleaned = morphology.postprocess(mask, se, cfg.post_ops)
        dataset_io.write_mask(cleaned, cfg.out / path.name)
    _write_run_manifest(cfg, cfg.out)
    print(f"post-processed {len(mask_files)} masks into {cfg.out}")
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "synth": cmd_synth,
    "split": cmd_split,
    "preprocess": cmd_preprocess,
    "postprocess": cmd_postprocess,
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file (CLI flags win)")
    parser.add_argument("--root", help="dataset root directory")
    parser.add_argument("--manifest", help="manifest path (default: ROOT/manifest.tsv)")
    parser.add_argument("--grid", help="threshold grid as start:stop:step")
    parser.add_argument("--threshold", type=float, help="single threshold for eval")
    parser.add_argument("--weights", help="objective weights as dice,iou,pixacc")
    parser.add_argument("--policy", choices=("include", "exclude"),
                        help="empty-ground-truth handling (default include)")
    parser.add_argument("--postprocess", action=argparse.BooleanOptionalAction,
                        help="apply morphological cleanup to predictions")
    parser.add_argument("--se", choices=("cross3", "square3"),
                        help="structuring element (default cross3)")
    parser.add_argument("--post-ops", dest="post_ops",
                        help="comma list of morphology steps (default open,close)")
    parser.add_argument("--out", help="output directory for reports")
    parser.add_argument("--seed", type=int, help="PRNG seed (default 0)")
    parser.add_argument("--workers", type=int, help="worker threads (default 1)")
    parser.add_argument("--from-csv", dest="from_csv",
                        help="replay a per-threshold aggregate CSV instead of images")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segsweep",
        description="Binary segmentation evaluation and threshold optimization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("eval", "evaluate a dataset at a single threshold"),
        ("sweep", "sweep the threshold grid and report metric curves"),
        ("optimize", "sweep, then print the objective-maximizing threshold"),
        ("synth", "generate a synthetic dataset with a planted optimum"),
        ("split", "assign 80:10:10 train/validation/test splits"),
        ("preprocess", "resize, normalize, and optionally augment a dataset"),
        ("postprocess", "apply morphological cleanup to mask files"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common_flags(p)
        if name == "synth":
            p.add_argument("--n", type=int, help="number of images (default 16)")
            p.add_argument("--size", help="image size as WxH (default 256x256)")
            p.add_argument("--presence", type=float,
                           help="probability a mask is non-empty (default 0.6)")
            p.add_argument("--plant", type=float,
                           help="planted optimal threshold (default 0.30)")
            p.add_argument("--blur-radius", dest="blur_radius", type=int,
                           help="box blur radius (default 1)")
            p.add_argument("--noise", type=float,
                           help="uniform noise amplitude (default 0.08)")
            p.add_argument("--compression", type=float,
                           help="contrast compression toward the plant (default 0.25)")
        if name == "preprocess":
            p.add_argument("--size", help="target size as WxH (default 256x256)")
            p.add_argument("--augment", type=int,
                           help="augmented copies per image (default 0)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _merge_config(args)
        return COMMANDS[args.command](cfg)
    except (SegsweepError, ValueError, OSError, RuntimeError) as exc:
        print(f"segsweep: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
