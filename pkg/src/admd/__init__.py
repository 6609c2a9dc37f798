"""Small infrared target detection with the absolute directional mean
difference (ADMD) filter, its baselines, metrics and benchmarks."""
from .detectors import (
    ALGORITHMS,
    DEFAULT_SCALES,
    aagd,
    admd_efficient,
    admd_naive,
    cell_means,
    detect,
    directional_differences,
    ms_log,
    multiscale,
    tophat,
)
from .filters import StructuringElement, box_mean, dilate, directional_max_se, erode, opening
from .imagecore import BorderPolicy, load_image, save_normalized

__version__ = "0.1.0"
