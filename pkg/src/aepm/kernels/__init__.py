"""Kernel backend selection.

The hot per-pixel loops (histogram, LUT mapping, component labeling, rough
edge scan) exist twice: a Cython extension (``aepm._core``) and a numpy
fallback (``aepm.kernels._numpy``). The compiled backend is used when the
extension built; set ``AEPM_BACKEND=fallback`` (or call ``set_backend``)
to force the pure-Python path. Both produce bit-identical results.
"""

import os

import numpy as np

from . import _numpy as _fallback

try:
    from aepm import _core as _compiled
except ImportError:  # extension not built; numpy fallback still works
    _compiled = None

_active = None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "fallback") if _compiled is not None else ("fallback",)


def set_backend(name: str) -> str:
    """Select 'compiled', 'fallback', or 'auto'. Returns the active name."""
    global _active
    if name == "auto":
        _active = _compiled if _compiled is not None else _fallback
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernel extension is not available")
        _active = _compiled
    elif name == "fallback":
        _active = _fallback
    else:
        raise ValueError(f"unknown backend {name!r}")
    return backend_name()


def backend_name() -> str:
    return "compiled" if _active is _compiled and _compiled is not None else "fallback"


set_backend(os.environ.get("AEPM_BACKEND", "auto"))


def hist256(img: np.ndarray) -> np.ndarray:
    """256-bin histogram of a [0,1] image, bin = floor(v*255 + 0.5)."""
    return _active.hist256(img)


def apply_lut(img: np.ndarray, lut: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Per-pixel lookup lut[floor(v*255 + 0.5)] as float64."""
    return _active.apply_lut(img, lut, out)


def edge_pair_samples(g: np.ndarray, cols: np.ndarray, offset: int):
    """Nonzero in-bounds pixel pairs at cols -/+ offset (0-based), row-wise."""
    return _active.edge_pair_samples(g, np.ascontiguousarray(cols, dtype=np.int64), offset)


def label_components(mask: np.ndarray, connectivity: int):
    """Label connected nonzero pixels; labels ordered by first row-major pixel.

    Returns (labels int32 (h, w), sizes int64 (L,)) with sizes[k] the pixel
    count of label k+1.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    return _active.label_components(np.ascontiguousarray(mask, dtype=np.uint8), connectivity)


def rough_edge_scan(g: np.ndarray, mu: float) -> np.ndarray:
    """First column per row with 0 < g < mu, stopping at the chest-wall side."""
    return _active.rough_edge_scan(g, float(mu))
