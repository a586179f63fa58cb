"""Numpy/scipy fallback for the compiled kernels.

Must stay bit-identical to ``aepm._core``: the parity tests compare both
backends on random inputs, and batch reports must not depend on which one
is active.
"""

import numpy as np
import scipy.ndimage


def hist256(img: np.ndarray) -> np.ndarray:
    q = np.floor(img * 255.0 + 0.5).astype(np.intp)
    return np.bincount(q.ravel(), minlength=256).astype(np.int64)


def apply_lut(img: np.ndarray, lut: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    q = np.floor(img * 255.0 + 0.5).astype(np.intp)
    return np.take(lut, q, out=out)


def edge_pair_samples(g: np.ndarray, cols: np.ndarray, offset: int):
    w = g.shape[1]
    ok = (cols - offset >= 0) & (cols + offset < w)
    rows = np.flatnonzero(ok)
    c = cols[rows]
    left = g[rows, c - offset]
    right = g[rows, c + offset]
    keep = (left > 0.0) & (right > 0.0)
    return left[keep], right[keep]


_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def label_components(mask: np.ndarray, connectivity: int):
    """scipy labeling renumbered so labels follow first row-major appearance."""
    struct = _STRUCT_8 if connectivity == 8 else _STRUCT_4
    raw, n = scipy.ndimage.label(mask, structure=struct)
    if n == 0:
        return np.zeros(mask.shape, dtype=np.int32), np.zeros(0, dtype=np.int64)
    flat = raw.ravel()
    ids, first, counts = np.unique(flat, return_index=True, return_counts=True)
    fg = ids != 0
    ids, first, counts = ids[fg], first[fg], counts[fg]
    order = np.argsort(first, kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[ids[order]] = np.arange(1, len(order) + 1, dtype=np.int32)
    return remap[raw], counts[order].astype(np.int64)


def rough_edge_scan(g: np.ndarray, mu: float) -> np.ndarray:
    qualifies = (g > 0.0) & (g < mu)
    has_any = qualifies.any(axis=1)
    first = qualifies.argmax(axis=1).astype(np.int32) + 1  # 1-based
    stop = ~has_any | (first <= 2)
    stop_rows = np.flatnonzero(stop)
    n = stop_rows[0] if stop_rows.size else g.shape[0]
    return first[:n].copy()
