"""Dispatch between the compiled kernels and the NumPy fallback.

The compiled extension is optional; when present it is selected at import
time. ``HAS_NATIVE`` records which path is active, and ``reference`` is
always importable for cross-checking.
"""

import numpy as np

from afva import _reference as reference

try:
    from afva import _native as _impl

    HAS_NATIVE = True
except ImportError:
    _impl = reference
    HAS_NATIVE = False

LBP_BINS = reference.LBP_BINS


def lbp_counts(gray: np.ndarray) -> np.ndarray:
    return _impl.lbp_counts(np.ascontiguousarray(gray, dtype=np.float64))


def resize_bilinear(src: np.ndarray, width: int, height: int) -> np.ndarray:
    return _impl.resize_bilinear(
        np.ascontiguousarray(src, dtype=np.float64), width, height
    )
