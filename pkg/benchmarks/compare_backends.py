#!/usr/bin/env python3
"""Compare the compiled kernel extension against the numpy fallback.

Times the four dispatched kernels on a 1024x1024 phantom and the full
segmentation pipeline on several sizes, printing per-backend medians and
the speedup. Results must be bit-identical between backends (the test
suite enforces that); this script only reports speed.

Usage: python benchmarks/compare_backends.py [--reps N]
"""

import argparse
import statistics
import time

import numpy as np

from aepm import kernels
from aepm.beta_transform import BetaParams, build_lut, mean_nonzero_intensity
from aepm.edge_detect import segment
from aepm.phantom import PhantomSpec, generate_phantom
from aepm.preprocess import remove_background


def median_ms(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times)


def kernel_cases():
    img, _ = generate_phantom(PhantomSpec(size=1024, seed=9000))
    clean = remove_background(img).clean
    lut = build_lut(BetaParams(5.0, 3.0))
    mu = mean_nonzero_intensity(clean)
    g = kernels.apply_lut(clean.pixels, lut.levels)
    mask = (clean.pixels > 0.0).astype(np.uint8)
    cols = np.full(clean.height, clean.width // 2, dtype=np.int64)
    return {
        "hist256 (1024^2)": lambda: kernels.hist256(clean.pixels),
        "apply_lut (1024^2)": lambda: kernels.apply_lut(clean.pixels, lut.levels),
        "label_components (1024^2)": lambda: kernels.label_components(mask, 8),
        "rough_edge_scan (1024^2)": lambda: kernels.rough_edge_scan(g, mu),
        "edge_pair_samples (1024 rows)": lambda: kernels.edge_pair_samples(g, cols, 2),
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=9)
    args = parser.parse_args()

    if "compiled" not in kernels.available_backends():
        raise SystemExit("compiled extension not built; nothing to compare")

    print(f"{'kernel':<32} {'compiled':>12} {'fallback':>12} {'speedup':>9}")
    for name, fn in kernel_cases().items():
        kernels.set_backend("compiled")
        fn()  # warm up
        t_c = median_ms(fn, args.reps)
        kernels.set_backend("fallback")
        fn()
        t_f = median_ms(fn, args.reps)
        print(f"{name:<32} {t_c:>9.3f} ms {t_f:>9.3f} ms {t_f / t_c:>8.2f}x")

    print(f"\n{'segment (full pipeline)':<32} {'compiled':>12} {'fallback':>12} {'speedup':>9}")
    for size in (256, 512, 1024):
        img, _ = generate_phantom(PhantomSpec(size=size, seed=9000 + size))
        kernels.set_backend("compiled")
        segment(img)
        t_c = median_ms(lambda: segment(img), args.reps)
        kernels.set_backend("fallback")
        segment(img)
        t_f = median_ms(lambda: segment(img), args.reps)
        print(f"{f'{size}x{size}':<32} {t_c:>9.1f} ms {t_f:>9.1f} ms {t_f / t_c:>8.2f}x")
    kernels.set_backend("auto")


if __name__ == "__main__":
    main()
