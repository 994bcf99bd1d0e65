"""segsweep: binary segmentation evaluation and threshold optimization.

Binarizes probability maps over candidate thresholds, scores them with
Dice / IoU / pixel accuracy, and selects the operating threshold that
maximizes a weighted objective. Ships with preprocessing, binary
morphology, bit-exact dataset serialization, and a synthetic data
generator whose planted optimum doubles as a test oracle.
"""

from segsweep.types import (
    BinaryMask,
    ConfusionCounts,
    EvaluationTag,
    MetricTriple,
    ObjectiveWeights,
    ProbabilityMap,
    ThresholdGrid,
    complement,
)
from segsweep.errors import (
    EmptyDatasetError,
    PmapFormatError,
    SegsweepError,
    ShapeMismatchError,
    UnsupportedFormatError,
)
from segsweep.metrics import (
    binarize,
    confusion,
    dice,
    evaluate_pair,
    iou,
    metric_triple,
    pixel_accuracy,
)
from segsweep.sweep import (
    PerImageCurve,
    SweepResult,
    aggregate,
    objective,
    optimize,
    run_sweep,
    sweep_image,
)
from segsweep.morphology import (
    StructuringElement,
    close_mask,
    dilate,
    erode,
    open_mask,
    postprocess,
)
from segsweep.preprocess import (
    AugmentationSpec,
    GrayImage,
    augment,
    binarize_mask_image,
    normalize,
    resize_image,
    resize_mask,
)
from segsweep.dataset_io import (
    DatasetManifest,
    ManifestRecord,
    read_mask,
    read_pmap,
    split_dataset,
    write_mask,
    write_pmap,
)
from segsweep.synth import SynthSpec, gen_mask, gen_pair, gen_probability_map

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # types
    "BinaryMask",
    "ConfusionCounts",
    "EvaluationTag",
    "MetricTriple",
    "ObjectiveWeights",
    "ProbabilityMap",
    "ThresholdGrid",
    "complement",
    # errors
    "EmptyDatasetError",
    "PmapFormatError",
    "SegsweepError",
    "ShapeMismatchError",
    "UnsupportedFormatError",
    # metrics
    "binarize",
    "confusion",
    "dice",
    "evaluate_pair",
    "iou",
    "metric_triple",
    "pixel_accuracy",
    # sweep engine
    "PerImageCurve",
    "SweepResult",
    "aggregate",
    "objective",
    "optimize",
    "run_sweep",
    "sweep_image",
    # morphology
    "StructuringElement",
    "close_mask",
    "dilate",
    "erode",
    "open_mask",
    "postprocess",
    # preprocessing
    "AugmentationSpec",
    "GrayImage",
    "augment",
    "binarize_mask_image",
    "normalize",
    "resize_image",
    "resize_mask",
    # dataset io
    "DatasetManifest",
    "ManifestRecord",
    "read_mask",
    "read_pmap",
    "split_dataset",
    "write_mask",
    "write_pmap",
    # synthetic data
    "SynthSpec",
    "gen_mask",
    "gen_pair",
    "gen_probability_map",
]
