"""Command-line entry point; flags mirror AdapterConfig."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from segsweep_adapter.inference import AdapterConfig, infer_and_dump


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="segsweep-adapter",
        description=(
            "Run DeepLabV3/ResNet-50 over grayscale images and emit "
            "PMAP v1 probability maps plus a manifest"
        ),
    )
    parser.add_argument("--images", required=True, help="input image directory")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--checkpoint", help="model state-dict path (optional)")
    parser.add_argument("--masks", help="ground-truth mask directory to copy through")
    parser.add_argument("--device", default="cpu", help="torch device (default cpu)")
    parser.add_argument("--batch-size", type=int, default=4)
    args = parser.parse_args(argv)
    try:
        config = AdapterConfig(
            image_dir=Path(args.images),
            out_dir=Path(args.out),
            checkpoint=Path(args.checkpoint) if args.checkpoint else None,
            mask_dir=Path(args.masks) if args.masks else None,
            device=args.device,
            batch_size=args.batch_size,
        )
        return infer_and_dump(config)
    except (ValueError, OSError) as exc:
        print(f"segsweep-adapter: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
