"""Area-normalized segmentation error: FP/FN proportions and corpus bins.

A pixel column x on row y belongs to a muscle region exactly when x < E(y),
the same strict convention the removal step uses, so that the evaluated and
removed regions coincide. Errors are normalized by the reference region's
pixel area.
"""

from dataclasses import dataclass
import math

import numpy as np

from .image_io import EdgePolyline

BIN_LABELS = (
    "(FP,FN) < 0.05",
    "min(FP,FN) < 0.05, max(FP,FN) < 0.10",
    "min(FP,FN) < 0.05, max(FP,FN) > 0.10",
    "0.05 < (FP,FN) < 0.10",
    "0.05 < min(FP,FN) < 0.10, max(FP,FN) > 0.10",
    "(FP,FN) > 0.10",
)


@dataclass(frozen=True)
class ImageError:
    fp: float
    fn_: float
    area: int
    rows_compared: int


@dataclass
class CorpusReport:
    n_images: int
    fp_mean: float
    fn_mean: float
    bins: list[int]
    per_image: list[ImageError]


def muscle_area(reference: EdgePolyline) -> int:
    """Pixel count of the region left of the edge: sum of ceil(E(y)) - 1."""
    if len(reference) == 0:
        raise ValueError("empty reference edge")
    cols = np.ceil(reference.xs).astype(np.int64) - 1
    return int(np.maximum(cols, 0).sum())


def fp_fn(proposed: EdgePolyline, reference: EdgePolyline) -> ImageError:
    """Row-sum FP/FN proportions over the reference's rows.

    Rows where the proposal is absent count as E_pro(y) = 1: nothing was
    proposed there, so the whole reference width lands in FN.
    """
    if len(proposed) == 0 or len(reference) == 0:
        raise ValueError("edges must be non-empty")
    p = len(reference)
    area = muscle_area(reference)
    if area == 0:
        raise ValueError("degenerate reference: zero muscle area")
    e_pro = np.ones(p, dtype=np.float64)
    k = min(p, len(proposed))
    e_pro[:k] = proposed.xs[:k]
    e_ref = reference.xs
    fp = float(np.maximum(0.0, e_pro - e_ref).sum() / area)
    fn = float(np.maximum(0.0, e_ref - e_pro).sum() / area)
    return ImageError(fp=fp, fn_=fn, area=area, rows_compared=p)


def classify_bin(fp: float, fn: float) -> int:
    """Index into BIN_LABELS, predicates evaluated top-down, first match wins.

    Boundaries are strict as printed; the last bin acts as the catch-all so
    the six bins partition all of [0, inf)^2.
    """
    mn, mx = min(fp, fn), max(fp, fn)
    if mx < 0.05:
        return 0
    if mn < 0.05 and mx < 0.10:
        return 1
    if mn < 0.05 and mx > 0.10:
        return 2
    if 0.05 < mn and mx < 0.10:
        return 3
    if 0.05 < mn < 0.10 and mx > 0.10:
        return 4
    return 5


def aggregate(errors: list[ImageError]) -> CorpusReport:
    """Corpus means and the six-bin error distribution."""
    if not errors:
        raise ValueError("no image errors to aggregate")
    bins = [0] * 6
    for e in errors:
        bins[classify_bin(e.fp, e.fn_)] += 1
    n = len(errors)
    return CorpusReport(
        n_images=n,
        fp_mean=math.fsum(e.fp for e in errors) / n,
        fn_mean=math.fsum(e.fn_ for e in errors) / n,
        bins=bins,
        per_image=list(errors),
    )
