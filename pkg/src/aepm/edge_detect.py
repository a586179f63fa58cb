"""Muscle edge extraction and removal.

For every candidate beta the cleaned image is transformed, a rough edge is
read off as the first transformed pixel per row that drops below the image's
mean nonzero intensity, the edge is smoothed with a least-squares cubic
B-spline, and the beta whose smoothed edge shows the strongest intensity
contrast across it wins. Everything left of the winning edge is zeroed.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np
from scipy.interpolate import BSpline

from . import kernels
from .beta_transform import (
    ALPHA_DEFAULT,
    BetaParams,
    apply_transform,
    beta_grid,
    build_lut,
    mean_nonzero_intensity,
)
from .image_io import GrayImage, EdgePolyline, MIN_PIPELINE_DIM, mirror_image, normalize_orientation
from .preprocess import BinaryMask, remove_background

# a selected column at or left of this marks arrival at the chest wall
CHEST_WALL_X = 2


class DegenerateEdgeError(ValueError):
    """Edge too short to be a usable muscle boundary."""


@dataclass
class SegmentationConfig:
    alpha: float = ALPHA_DEFAULT
    beta_min: float = 2.0
    beta_max: float = 6.0
    beta_step: float = 0.1
    edge_offset: int = 2
    min_edge_rows: int = 10
    bspline_ctrl_divisor: int = 64
    mu_mode: str = "clean"  # "clean" or "per_beta"
    connectivity: int = 8
    orientation: str = "auto"  # "auto", "keep", or "flip"

    def validate(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta_min > self.beta_max:
            raise ValueError("beta_min must be <= beta_max")
        if self.beta_step <= 0:
            raise ValueError("beta_step must be positive")
        if self.edge_offset < 1:
            raise ValueError("edge_offset must be >= 1")
        if self.min_edge_rows < 1:
            raise ValueError("min_edge_rows must be >= 1")
        if self.bspline_ctrl_divisor < 1:
            raise ValueError("bspline_ctrl_divisor must be >= 1")
        if self.mu_mode not in ("clean", "per_beta"):
            raise ValueError(f"unknown mu_mode {self.mu_mode!r}")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        if self.orientation not in ("auto", "keep", "flip"):
            raise ValueError(f"unknown orientation {self.orientation!r}")

    def betas(self) -> list[float]:
        return beta_grid(self.beta_min, self.beta_max, self.beta_step)


@dataclass
class Diagnostics:
    threshold: float | None = None
    threshold_fallback: bool = False
    was_flipped: bool = False
    objects_removed: int = 0
    mu: float | None = None
    failure: bool = False
    degenerate_betas: list[float] = field(default_factory=list)


@dataclass
class SegmentationResult:
    beta_hat: float | None
    edge: EdgePolyline
    muscle_mask: BinaryMask
    segmented: GrayImage
    per_beta_scores: list[tuple[float, float]]
    diagnostics: Diagnostics


def rough_edge(g_img: GrayImage, mu: float, min_rows: int = 10) -> EdgePolyline:
    """Per-row first transformed pixel with 0 < g < mu, from the top.

    Collection stops before the first row with no qualifying pixel or whose
    selected column is <= CHEST_WALL_X. Raises DegenerateEdgeError when
    fewer than ``min_rows`` rows were collected.
    """
    xs = kernels.rough_edge_scan(g_img.pixels, mu)
    if xs.size < min_rows:
        raise DegenerateEdgeError(f"rough edge has {xs.size} rows, need {min_rows}")
    return EdgePolyline(xs.astype(np.float64))


@lru_cache(maxsize=64)
def _spline_basis(n: int, n_interior: int) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and pseudo-inverse for a clamped cubic fit at rows 1..n."""
    interior = 1.0 + (n - 1.0) * np.arange(1, n_interior + 1) / (n_interior + 1)
    knots = np.concatenate([np.ones(4), interior, np.full(4, float(n))])
    rows = np.arange(1, n + 1, dtype=np.float64)
    design = BSpline.design_matrix(rows, knots, 3).toarray()
    pinv = np.linalg.pinv(design)
    design.setflags(write=False)
    pinv.setflags(write=False)
    return design, pinv


def _smooth_xs(xs: np.ndarray, width: int, ctrl_divisor: int) -> np.ndarray:
    n = xs.size
    if n < 8:
        raise DegenerateEdgeError(f"edge of {n} rows is too short to smooth")
    n_interior = max(4, round(n / ctrl_divisor))
    design, pinv = _spline_basis(n, n_interior)
    coef = pinv @ xs
    return np.clip(design @ coef, 1.0, float(width))


def smooth_edge_bspline(edge: EdgePolyline, width: int,
                        ctrl_divisor: int = 64) -> EdgePolyline:
    """Least-squares cubic B-spline fit of column versus row.

    Uses max(4, round(n / ctrl_divisor)) uniformly spaced interior knots,
    resampled at the same integer rows and clamped to [1, width].
    """
    return EdgePolyline(_smooth_xs(edge.xs, width, ctrl_divisor))


def _contrast_from_array(g: np.ndarray, xs: np.ndarray, offset: int) -> float:
    # edge columns are >= 1, so int truncation of xs+0.5 rounds half up
    cols = (xs + 0.5).astype(np.int64) - 1
    left, right = kernels.edge_pair_samples(g, cols, offset)
    if left.size == 0:
        return 0.0
    return float(np.abs(left - right).mean())


def edge_contrast_score(g_img: GrayImage, edge: EdgePolyline, offset: int = 2) -> float:
    """Mean |g(x-offset, y) - g(x+offset, y)| across the edge rows.

    Rows whose sample columns fall outside the image or hit a zero
    (background) pixel are skipped; no valid row gives score 0.
    """
    if len(edge) > g_img.height:
        raise ValueError("edge has more rows than the image")
    return _contrast_from_array(g_img.pixels, edge.xs, offset)


def select_beta(clean: GrayImage, config: SegmentationConfig | None = None,
                grid: list[float] | None = None) -> SegmentationResult:
    """Sweep the beta grid and keep the edge with maximal contrast score.

    Ties prefer the smaller beta; betas with degenerate edges score -inf.
    If every beta degenerates the result carries the failure flag, an empty
    edge, and the clean image untouched.
    """
    config = config or SegmentationConfig()
    config.validate()
    if grid is None:
        grid = config.betas()
    if not grid:
        raise ValueError("beta grid is empty")

    mu_clean = mean_nonzero_intensity(clean)
    on_grid = clean.is_on_255_grid()
    scratch = np.empty_like(clean.pixels) if on_grid else None

    scores: list[tuple[float, float]] = []
    degenerate: list[float] = []
    best_beta = None
    best_score = -math.inf
    best_xs = None

    for beta in grid:
        lut = build_lut(BetaParams(alpha=config.alpha, beta=beta))
        if on_grid:
            g = kernels.apply_lut(clean.pixels, lut.levels, scratch)
        else:
            g = apply_transform(clean, lut).pixels
        if config.mu_mode == "per_beta":
            mu = float(g[g > 0.0].mean())
        else:
            mu = mu_clean
        try:
            xs = kernels.rough_edge_scan(g, mu)
            if xs.size < config.min_edge_rows:
                raise DegenerateEdgeError(f"{xs.size} rows < {config.min_edge_rows}")
            sm = _smooth_xs(xs.astype(np.float64), clean.width, config.bspline_ctrl_divisor)
        except DegenerateEdgeError:
            degenerate.append(beta)
            scores.append((beta, -math.inf))
            continue
        score = _contrast_from_array(g, sm, config.edge_offset)
        scores.append((beta, score))
        if score > best_score:
            best_score = score
            best_beta = beta
            best_xs = sm

    failure = best_beta is None
    edge = EdgePolyline(np.empty(0) if failure else best_xs)
    diag = Diagnostics(mu=mu_clean, failure=failure, degenerate_betas=degenerate)
    return SegmentationResult(
        beta_hat=best_beta,
        edge=edge,
        muscle_mask=BinaryMask(np.zeros(clean.pixels.shape, dtype=np.uint8)),
        segmented=clean,
        per_beta_scores=scores,
        diagnostics=diag,
    )


def remove_muscle(clean: GrayImage, edge: EdgePolyline) -> tuple[GrayImage, BinaryMask]:
    """Zero pixels strictly left of the edge; rows past the edge stay put."""
    k = len(edge)
    h, w = clean.pixels.shape
    if k > h:
        raise ValueError("edge has more rows than the image")
    bits = np.zeros((h, w), dtype=np.uint8)
    if k:
        cols = np.arange(1, w + 1, dtype=np.float64)
        bits[:k] = cols[None, :] < edge.xs[:, None]
    out = clean.pixels.copy()
    out[bits.astype(bool)] = 0.0
    return GrayImage._wrap(out, clean.source_max_value, clean._on_grid), BinaryMask(bits)


def segment(img: GrayImage, config: SegmentationConfig | None = None) -> SegmentationResult:
    """Full pipeline: orient, strip background, pick beta, remove the muscle.

    Deterministic for a fixed config. A degenerate sweep (no beta yields a
    usable edge) returns a flagged result with the cleaned image untouched
    rather than raising.
    """
    config = config or SegmentationConfig()
    config.validate()
    if img.width < MIN_PIPELINE_DIM or img.height < MIN_PIPELINE_DIM:
        raise ValueError(
            f"image {img.width}x{img.height} below pipeline minimum "
            f"{MIN_PIPELINE_DIM}x{MIN_PIPELINE_DIM}")

    if config.orientation == "auto":
        oriented, flipped = normalize_orientation(img)
    elif config.orientation == "flip":
        oriented, flipped = mirror_image(img), True
    else:
        oriented, flipped = img, False

    removal = remove_background(oriented, config.connectivity)
    result = select_beta(removal.clean, config)

    if not result.diagnostics.failure:
        segmented, mask = remove_muscle(removal.clean, result.edge)
        result.segmented = segmented
        result.muscle_mask = mask

    result.diagnostics = replace(
        result.diagnostics,
        threshold=removal.threshold,
        threshold_fallback=removal.threshold_fallback,
        was_flipped=flipped,
        objects_removed=removal.objects_removed,
    )
    return result
