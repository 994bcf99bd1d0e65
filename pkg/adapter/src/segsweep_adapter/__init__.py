"""DeepLabV3/ResNet-50 inference adapter for the segsweep toolkit.

Consumes grayscale images, emits per-pixel foreground probabilities as
PMAP v1 files plus a tab-separated manifest, so real model outputs flow
straight into segsweep's evaluation and threshold-optimization pipeline.
"""

from segsweep_adapter.inference import AdapterConfig, infer_and_dump
from segsweep_adapter.model import build_model
from segsweep_adapter.pmap import pmap_bytes, write_pmap

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AdapterConfig",
    "build_model",
    "infer_and_dump",
    "pmap_bytes",
    "write_pmap",
]
