"""Independent reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way (explicit
loops, recursion-free flood fill, adaptive quadrature) and must not share
code with the package under test.
"""

import math

import numpy as np
from scipy.integrate import quad


def quad_reg_inc_beta(x: float, alpha: float, beta: float) -> float:
    """Adaptive-quadrature evaluation of the regularized incomplete Beta."""
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    val, _ = quad(lambda t: t ** (alpha - 1.0) * (1.0 - t) ** (beta - 1.0),
                  0.0, x, epsabs=1e-14, epsrel=1e-13, limit=200)
    ln_b = math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)
    return val / math.exp(ln_b)


def count_histogram(pixels: np.ndarray) -> np.ndarray:
    """Brute-force per-pixel gray-level counting."""
    bins = np.zeros(256, dtype=np.int64)
    for v in pixels.ravel():
        bins[int(math.floor(v * 255.0 + 0.5))] += 1
    return bins


def flood_fill_labels(mask: np.ndarray, connectivity: int):
    """Stack-based flood fill; labels ordered by first row-major pixel.

    Returns (labels int32, sizes list) matching the production contract.
    """
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    if connectivity == 8:
        neigh = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        neigh = [(-1, 0), (0, -1), (0, 1), (1, 0)]
    sizes = []
    next_label = 0
    for y in range(h):
        for x in range(w):
            if mask[y, x] == 0 or labels[y, x] != 0:
                continue
            next_label += 1
            stack = [(y, x)]
            labels[y, x] = next_label
            count = 0
            while stack:
                cy, cx = stack.pop()
                count += 1
                for dy, dx in neigh:
                    ny, nx = cy + dy, cx + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and labels[ny, nx] == 0:
                        labels[ny, nx] = next_label
                        stack.append((ny, nx))
            sizes.append(count)
    return labels, sizes


def smooth_and_scan_threshold(bins: np.ndarray):
    """Literal evaluation of the first-valley threshold definition.

    Returns (bin index, found flag). The smoothed sequence s uses a window-5
    centered mean truncated at the ends; a valley is the first i with
    s[i] < s[i-1] and s[i] <= s[i+1] preceded by a local maximum, where
    index 0 counts as a local maximum when s[0] >= s[1].
    """
    s = []
    b = bins.astype(float)
    for i in range(256):
        window = b[max(0, i - 2):min(256, i + 3)]
        s.append(sum(window) / len(window))

    def is_local_max(j: int) -> bool:
        if j == 0:
            return s[0] >= s[1]
        return s[j] > s[j - 1] and s[j] >= s[j + 1]

    for i in range(1, 255):
        if s[i] < s[i - 1] and s[i] <= s[i + 1] and any(is_local_max(j) for j in range(i)):
            return i, True
    return -1, False


def otsu_threshold_bin(bins: np.ndarray) -> int:
    """Exhaustive between-class-variance maximization (ties: smallest bin)."""
    total = int(bins.sum())
    best_t, best_var = 0, -1.0
    for t in range(255):
        n0 = int(bins[:t + 1].sum())
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        mu0 = sum(i * int(bins[i]) for i in range(t + 1)) / n0
        mu1 = sum(i * int(bins[i]) for i in range(t + 1, 256)) / n1
        var = (n0 / total) * (n1 / total) * (mu0 - mu1) ** 2 * total * total
        if var > best_var:
            best_var, best_t = var, t
    return best_t


def rasterized_fp_fn(pro_xs: np.ndarray, ref_xs: np.ndarray, width: int):
    """Pixel-set FP/FN over the reference row span, strict x < E(y).

    Returns raw pixel counts (fp_pixels, fn_pixels, area).
    """
    p = len(ref_xs)
    fp = fn = area = 0
    for y in range(p):
        ref_cols = {x for x in range(1, width + 1) if x < ref_xs[y]}
        pro_edge = pro_xs[y] if y < len(pro_xs) else 1.0
        pro_cols = {x for x in range(1, width + 1) if x < pro_edge}
        fp += len(pro_cols - ref_cols)
        fn += len(ref_cols - pro_cols)
        area += len(ref_cols)
    return fp, fn, area
