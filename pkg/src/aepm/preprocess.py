"""Background cleanup: histogram thresholding plus largest-component selection.

Labels, markers and wedges sit in the dark background of an MLO mammogram.
The gray-level histogram has a dominant background peak followed by a valley
before the breast mass; binarizing at that valley and keeping the largest
connected object removes everything but breast tissue and muscle.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .image_io import GrayImage


class NoForegroundError(ValueError):
    """Raised when a mask holds no nonzero pixel."""


@dataclass(frozen=True, eq=False)
class Histogram:
    """256 gray-level counts; bin q holds pixels with floor(v*255+0.5) == q."""

    bins: np.ndarray
    total: int


@dataclass(eq=False)
class BinaryMask:
    bits: np.ndarray  # (h, w) uint8 in {0, 1}

    def __post_init__(self):
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 2:
            raise ValueError("mask must be 2-D")
        self.bits = bits

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(eq=False)
class LabelMap:
    """Integer component labels; 0 is background, 1..L are objects.

    ``component_sizes[k]`` is the pixel count of label k+1. Labels are
    assigned in order of each component's first pixel in a row-major scan.
    """

    labels: np.ndarray
    component_sizes: np.ndarray

    @property
    def n_components(self) -> int:
        return int(self.component_sizes.size)

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]


@dataclass(frozen=True)
class ThresholdResult:
    c: float
    otsu_fallback: bool


@dataclass
class BackgroundRemoval:
    clean: GrayImage
    threshold: float
    threshold_fallback: bool
    objects_removed: int


def gray_histogram(img: GrayImage) -> Histogram:
    bins = kernels.hist256(img.pixels)
    return Histogram(bins=bins, total=int(img.pixels.size))


_SMOOTH_WINDOW = np.ones(5)
# window lengths after truncation at the array ends: 3, 4, 5, ..., 5, 4, 3
_SMOOTH_COUNTS = np.convolve(np.ones(256), _SMOOTH_WINDOW, mode="same")


def _smooth_bins(bins: np.ndarray) -> np.ndarray:
    """Centered moving average, window 5, truncated at the ends."""
    sums = np.convolve(bins.astype(np.float64), _SMOOTH_WINDOW, mode="same")
    return sums / _SMOOTH_COUNTS


def _otsu_bin(bins: np.ndarray) -> int:
    """Gray level maximizing between-class variance (ties: smallest level)."""
    b = bins.astype(np.float64)
    total = b.sum()
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(b)
    m0 = np.cumsum(b * levels)
    mt = m0[-1]
    w0t = w0[:-1]
    w1t = total - w0t
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0[:-1] / w0t
        mu1 = (mt - m0[:-1]) / w1t
        var_between = w0t * w1t * (mu0 - mu1) ** 2
    var_between[~np.isfinite(var_between)] = -1.0
    return int(np.argmax(var_between))


def find_threshold(hist: Histogram) -> ThresholdResult:
    """Threshold at the first valley of the smoothed gray-level density.

    The smoothed sequence is scanned left to right for the first index i with
    s[i] < s[i-1] and s[i] <= s[i+1] that is preceded by a local maximum
    (index 0 counts as one when s[0] >= s[1], covering densities that start
    at the dominant background peak). Without any such valley the Otsu
    threshold is used and flagged.
    """
    if hist.total <= 0:
        raise ValueError("empty histogram")
    s = _smooth_bins(hist.bins)

    seen_max = s[0] >= s[1]
    for i in range(1, 255):
        if not seen_max and i >= 2 and s[i - 1] > s[i - 2] and s[i - 1] >= s[i]:
            seen_max = True
        if seen_max and s[i] < s[i - 1] and s[i] <= s[i + 1]:
            return ThresholdResult(c=i / 255.0, otsu_fallback=False)
    return ThresholdResult(c=_otsu_bin(hist.bins) / 255.0, otsu_fallback=True)


def binarize(img: GrayImage, c: float) -> BinaryMask:
    """Strict threshold: mask = 1 where intensity > c, else 0."""
    if not (0.0 <= c <= 1.0):
        raise ValueError(f"threshold {c} outside [0, 1]")
    return BinaryMask((img.pixels > c).astype(np.uint8))


def label_components(mask: BinaryMask, connectivity: int = 8) -> LabelMap:
    """Connected-component labels under 4- or 8-neighbor adjacency."""
    labels, sizes = kernels.label_components(mask.bits, connectivity)
    return LabelMap(labels=labels, component_sizes=sizes)


def largest_component(lm: LabelMap) -> BinaryMask:
    """Mask of the biggest component (ties: smallest label index)."""
    if lm.n_components == 0:
        raise NoForegroundError("no foreground object")
    best = int(np.argmax(lm.component_sizes)) + 1  # argmax takes first maximum
    return BinaryMask((lm.labels == best).astype(np.uint8))


def remove_background(img: GrayImage, connectivity: int = 8) -> BackgroundRemoval:
    """Zero every pixel outside the largest above-threshold object."""
    thr = find_threshold(gray_histogram(img))
    mask = binarize(img, thr.c)
    lm = label_components(mask, connectivity)
    keep = largest_component(lm)
    clean = np.where(keep.bits.astype(bool), img.pixels, 0.0)
    return BackgroundRemoval(
        clean=GrayImage._wrap(np.ascontiguousarray(clean), img.source_max_value, img._on_grid),
        threshold=thr.c,
        threshold_fallback=thr.otsu_fallback,
        objects_removed=lm.n_components - 1,
    )
