"""Uniform local binary pattern histogram (radius 1, 8 neighbors, 59 bins).

Each interior pixel yields an 8-bit code: bit k is set when the neighbor at
offset k (starting east, counter-clockwise) is >= the center. Codes with at
most two circular bit transitions get dedicated bins in ascending code
order; everything else shares the last bin.
"""

import numpy as np

from afva import kernels
from afva.imaging import ImageGray

LBP_DIM = kernels.LBP_BINS


def lbp(img: ImageGray) -> np.ndarray:
    """59-bin histogram normalized by the interior pixel count."""
    h, w = img.pixels.shape
    if h < 3 or w < 3:
        raise ValueError(f"image must be at least 3x3 for patterns, got {w}x{h}")
    counts = kernels.lbp_counts(img.pixels)
    return counts / counts.sum()
