"""Model construction: DeepLabV3 with a ResNet-50 backbone and a
single-channel segmentation head."""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Optional

import torch
from torchvision.models.segmentation import deeplabv3_resnet50

INIT_SEED = 0  # fixed init so checkpoint-less runs are reproducible


def build_model(checkpoint: Optional[Path] = None, device: str = "cpu") -> torch.nn.Module:
    """Single-channel DeepLabV3/ResNet-50, in eval mode on ``device``.

    With a checkpoint, its state dict is loaded strictly. Without one, the
    adapter tries the publicly pretrained backbone weights and otherwise
    falls back to a fixed-seed random initialization: the interchange path
    stays fully exercisable, but probabilities are meaningless, so a
    prominent warning is printed.
    """
    torch.manual_seed(INIT_SEED)
    weights_backbone = None
    if checkpoint is None:
        try:
            from torchvision.models import ResNet50_Weights

            ResNet50_Weights.IMAGENET1K_V2.get_state_dict(progress=False)
            weights_backbone = ResNet50_Weights.IMAGENET1K_V2
        except Exception:
            weights_backbone = None  # no download path in this environment

    model = deeplabv3_resnet50(
        weights=None, weights_backbone=weights_backbone, num_classes=1, aux_loss=False
    )
    if checkpoint is not None:
        state = torch.load(checkpoint, map_location="cpu", weights_only=True)
        if isinstance(state, dict) and "state_dict" in state:
            state = state["state_dict"]
        model.load_state_dict(state)
    else:
        source = "pretrained backbone" if weights_backbone else "random initialization"
        print(
            "segsweep-adapter: WARNING: no task checkpoint given; using "
            f"{source}. Output probabilities are NOT meaningful nerve "
            "predictions; only the file interchange is exercised.",
            file=sys.stderr,
        )
    model.to(device)
    model.eval()
    return model
