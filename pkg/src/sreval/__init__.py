"""sreval: resolution-degradation and super-resolution evaluation toolkit.

Quantifies how resolution loss and SR restoration affect image quality
(PSNR/SSIM, DFT ring-energy sharpness) and instance-segmentation accuracy
(COCO-style mask AP), with batch orchestration around external SR tools.
"""

__version__ = "0.1.0"

from .errors import SrevalError
from .focus import FocusLabel, FocusModel, calibrate, classify
from .image_io import LumaPlane, RasterImage, load_image, save_image, to_luma
from .manifest import (
    DatasetManifest,
    ImagePair,
    SpectrumBand,
    load_manifest,
    save_manifest,
    spectrum_split,
    validate_pairs,
)
from .metrics import QualityScores, compare_pair, psnr, psnr_histogram, ssim
from .pipeline import (
    OrderingMode,
    PipelineConfig,
    RunReport,
    ordering_experiment,
    run_external_sr,
    run_pipeline,
)
from .resample import KernelKind, decimate, degrade, resize
from .ringspec import RingSpectrum, compute_ring_spectrum, high_frequency_share
from .segeval import (
    Detection,
    EvalSummary,
    InstanceRecord,
    evaluate,
    mask_iou,
    match_and_ap,
    metric_correlation,
    percent_change,
)

__all__ = [
    "__version__",
    "SrevalError",
    "FocusLabel",
    "FocusModel",
    "calibrate",
    "classify",
    "LumaPlane",
    "RasterImage",
    "load_image",
    "save_image",
    "to_luma",
    "DatasetManifest",
    "ImagePair",
    "SpectrumBand",
    "load_manifest",
    "save_manifest",
    "spectrum_split",
    "validate_pairs",
    "QualityScores",
    "compare_pair",
    "psnr",
    "psnr_histogram",
    "ssim",
    "OrderingMode",
    "PipelineConfig",
    "RunReport",
    "ordering_experiment",
    "run_external_sr",
    "run_pipeline",
    "KernelKind",
    "decimate",
    "degrade",
    "resize",
    "RingSpectrum",
    "compute_ring_spectrum",
    "high_frequency_share",
    "Detection",
    "EvalSummary",
    "InstanceRecord",
    "evaluate",
    "mask_iou",
    "match_and_ap",
    "metric_correlation",
    "percent_change",
]
