"""Synthetic mammogram-like phantoms with analytically known muscle edges.

A phantom is deliberately minimal: a quarter-ellipse "breast" of flat tissue
intensity anchored to the top-left border, a right-triangle muscle region
overlaid on its top-left corner (optionally bowed), a few bright label
rectangles in the dark background, and Gaussian noise inside the body only.
That is enough to drive the full pipeline end to end against exact ground
truth. All randomness comes from ``numpy.random.default_rng`` (PCG64) seeded
from the spec, and the output is quantized to the k/255 grid so it is
indistinguishable from an image loaded from an 8-bit PGM file.
"""

from dataclasses import dataclass

import numpy as np

from .image_io import GrayImage, EdgePolyline

BREAST_WIDTH_FRAC = 0.80
BREAST_HEIGHT_FRAC = 0.90
LABEL_INTENSITY = 0.95
# tissue columns required between the muscle edge and the breast boundary
_EDGE_CLEARANCE = 4


@dataclass(frozen=True)
class PhantomSpec:
    size: int = 1024
    muscle_intensity: float = 0.85
    tissue_intensity: float = 0.45
    muscle_base_width: float = 0.45
    muscle_height: float = 0.55
    edge_curvature: float = 0.0
    noise_sigma: float = 0.02
    n_labels: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.size < 32:
            raise ValueError("phantom size must be >= 32")
        if not (0.0 < self.tissue_intensity < self.muscle_intensity <= 1.0):
            raise ValueError("need 0 < tissue_intensity < muscle_intensity <= 1")
        for name in ("muscle_base_width", "muscle_height"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must be in (0, 1)")
        if not (0.0 <= self.edge_curvature <= 2.0):
            raise ValueError("edge_curvature must be in [0, 2]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.n_labels < 0:
            raise ValueError("n_labels must be >= 0")


def _truth_columns(spec: PhantomSpec) -> np.ndarray:
    """Hypotenuse column per row: muscle occupies x < truth(y)."""
    h = spec.size
    n_rows = int(np.floor(spec.muscle_height * h + 0.5))
    if n_rows < 2:
        raise ValueError("muscle_height too small for this image size")
    base = spec.muscle_base_width * spec.size
    t = np.arange(n_rows, dtype=np.float64) / (n_rows - 1)
    return 1.0 + base * (1.0 - t) * (1.0 + spec.edge_curvature * t)


def generate_phantom(spec: PhantomSpec) -> tuple[GrayImage, EdgePolyline]:
    """Build the phantom image and its exact muscle boundary polyline.

    Deterministic for a fixed seed. Raises when the muscle triangle would
    poke out of the breast region (no tissue right of the edge).
    """
    n = spec.size
    rng = np.random.default_rng(spec.seed)

    xs = np.arange(1, n + 1, dtype=np.float64)
    ys = np.arange(1, n + 1, dtype=np.float64)
    ax = BREAST_WIDTH_FRAC * (n - 1)
    by = BREAST_HEIGHT_FRAC * (n - 1)
    breast = (((xs[None, :] - 1.0) / ax) ** 2 + ((ys[:, None] - 1.0) / by) ** 2) <= 1.0

    truth = _truth_columns(spec)
    n_rows = truth.size
    # breast must extend past the muscle edge on every muscle row
    row_idx = np.arange(n_rows, dtype=np.float64)
    inside = 1.0 - (row_idx / by) ** 2
    extent = 1.0 + ax * np.sqrt(np.maximum(inside, 0.0))
    if np.any(extent < truth + _EDGE_CLEARANCE):
        raise ValueError("muscle wider than breast: no tissue right of the edge")

    img = np.zeros((n, n), dtype=np.float64)
    img[breast] = spec.tissue_intensity
    muscle = np.zeros((n, n), dtype=bool)
    muscle[:n_rows] = xs[None, :] < truth[:, None]
    img[muscle] = spec.muscle_intensity

    body = breast | muscle
    if spec.noise_sigma > 0.0:
        noise = rng.normal(0.0, spec.noise_sigma, size=int(body.sum()))
        img[body] = np.clip(img[body] + noise, 0.0, 1.0)

    if spec.n_labels:
        img = _paint_labels(img, spec, rng, zone_left=int(np.ceil(1.0 + ax)) + 2)

    img = np.floor(img * 255.0 + 0.5) / 255.0
    image = GrayImage._wrap(np.ascontiguousarray(img), 255, on_grid=True)
    return image, EdgePolyline(truth)


def _paint_labels(img: np.ndarray, spec: PhantomSpec, rng: np.random.Generator,
                  zone_left: int) -> np.ndarray:
    """Bright rectangles in the background strip right of the breast."""
    n = spec.size
    lw = max(2, int(round(0.05 * n)))
    lh = max(2, int(round(0.04 * n)))
    zone_w = n - zone_left - lw - 1
    slot = n // (spec.n_labels + 1)
    if zone_w < 1 or slot < lh + 2:
        raise ValueError(f"cannot place {spec.n_labels} labels of {lh}px in a {n}px column")
    for k in range(1, spec.n_labels + 1):
        x0 = zone_left + int(rng.integers(0, zone_w))
        y0 = k * slot - lh // 2 + int(rng.integers(-2, 3))
        y0 = min(max(y0, 1), n - lh - 1)
        img[y0:y0 + lh, x0:x0 + lw] = LABEL_INTENSITY
    return img
