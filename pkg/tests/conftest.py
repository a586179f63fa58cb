import numpy as np
import pytest

from aepm.image_io import GrayImage


def make_p5(samples: np.ndarray, maxval: int = 255) -> bytes:
    """Assemble a binary PGM from a 2-D uint sample array."""
    h, w = samples.shape
    header = f"P5\n{w} {h}\n{maxval}\n".encode()
    if maxval > 255:
        return header + samples.astype(">u2").tobytes()
    return header + samples.astype(np.uint8).tobytes()


def image_from_samples(samples: np.ndarray, maxval: int = 255) -> GrayImage:
    return GrayImage(np.asarray(samples, dtype=np.float64) / maxval, maxval)


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)
