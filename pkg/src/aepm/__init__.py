"""Automatic pectoral muscle elimination for MLO-view mammograms.

Pipeline: orientation normalization, histogram-threshold background removal,
Beta-distribution intensity transformation with automatic parameter
selection, B-spline edge smoothing, muscle removal, and area-normalized
FP/FN evaluation against reference edges or synthetic phantoms.
"""

from .image_io import (
    GrayImage,
    EdgePolyline,
    PgmParseError,
    EdgeCsvParseError,
    read_pgm,
    write_pgm,
    read_edge_csv,
    write_edge_csv,
    normalize_orientation,
    mirror_image,
)
from .preprocess import (
    Histogram,
    BinaryMask,
    LabelMap,
    ThresholdResult,
    BackgroundRemoval,
    NoForegroundError,
    gray_histogram,
    find_threshold,
    binarize,
    label_components,
    largest_component,
    remove_background,
)
from .beta_transform import (
    BetaParams,
    TransformLut,
    beta_grid,
    reg_inc_beta,
    build_lut,
    apply_transform,
    mean_nonzero_intensity,
)
from .edge_detect import (
    SegmentationConfig,
    SegmentationResult,
    Diagnostics,
    DegenerateEdgeError,
    rough_edge,
    smooth_edge_bspline,
    edge_contrast_score,
    select_beta,
    remove_muscle,
    segment,
)
from .metrics import (
    ImageError,
    CorpusReport,
    BIN_LABELS,
    muscle_area,
    fp_fn,
    classify_bin,
    aggregate,
)
from .phantom import PhantomSpec, generate_phantom

__version__ = "0.1.0"

__all__ = [
    "GrayImage", "EdgePolyline", "PgmParseError", "EdgeCsvParseError",
    "read_pgm", "write_pgm", "read_edge_csv", "write_edge_csv",
    "normalize_orientation", "mirror_image",
    "Histogram", "BinaryMask", "LabelMap", "ThresholdResult",
    "BackgroundRemoval", "NoForegroundError",
    "gray_histogram", "find_threshold", "binarize", "label_components",
    "largest_component", "remove_background",
    "BetaParams", "TransformLut", "beta_grid", "reg_inc_beta", "build_lut",
    "apply_transform", "mean_nonzero_intensity",
    "SegmentationConfig", "SegmentationResult", "Diagnostics",
    "DegenerateEdgeError", "rough_edge", "smooth_edge_bspline",
    "edge_contrast_score", "select_beta", "remove_muscle", "segment",
    "ImageError", "CorpusReport", "BIN_LABELS", "muscle_area", "fp_fn",
    "classify_bin", "aggregate",
    "PhantomSpec", "generate_phantom",
    "__version__",
]
