"""Pure-NumPy implementations of the hot per-pixel kernels.

These are the fallback used when the compiled extension is unavailable and
the ground truth the extension is tested against. Both paths must produce
bit-identical results: the binary-pattern counts are integer comparisons,
and the resize evaluates the interpolation formula in the same operation
order as the C code.
"""

import numpy as np

# Neighbor offsets (row, col) starting east, counter-clockwise. Bit k of a
# pattern code corresponds to offsets[k].
NEIGHBOR_OFFSETS = (
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
)


def _circular_transitions(code: int) -> int:
    bits = [(code >> k) & 1 for k in range(8)]
    return sum(bits[k] != bits[(k + 1) % 8] for k in range(8))


def build_uniform_code_map() -> np.ndarray:
    """Map each 8-bit pattern code to its histogram bin.

    Codes with at most two circular bit transitions (58 of them) get their
    own bin, in ascending code order; the rest share the final bin, index 58.
    """
    uniform_codes = [c for c in range(256) if _circular_transitions(c) <= 2]
    table = np.full(256, len(uniform_codes), dtype=np.int64)
    for bin_index, code in enumerate(uniform_codes):
        table[code] = bin_index
    return table


UNIFORM_CODE_MAP = build_uniform_code_map()
LBP_BINS = 59


def lbp_counts(gray: np.ndarray) -> np.ndarray:
    """Count uniform-mapped binary-pattern codes over all interior pixels.

    ``gray`` is a 2-D float array of at least 3x3. Bit k of a pixel's code is
    set when the neighbor at NEIGHBOR_OFFSETS[k] is >= the center value.
    Returns int64 counts of length 59.
    """
    center = gray[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.int64)
    h, w = gray.shape
    for k, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = gray[1 + dr : h - 1 + dr, 1 + dc : w - 1 + dc]
        codes |= (neighbor >= center).astype(np.int64) << k
    bins = UNIFORM_CODE_MAP[codes]
    return np.bincount(bins.ravel(), minlength=LBP_BINS)


def resize_bilinear(src: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resample with half-pixel centers and edge clamping."""
    src_h, src_w = src.shape
    out = np.empty((height, width), dtype=np.float64)

    scale_x = src_w / width
    scale_y = src_h / height
    # Sample positions at destination pixel centers, clamped into the source.
    xs = np.clip((np.arange(width) + 0.5) * scale_x - 0.5, 0.0, src_w - 1.0)
    ys = np.clip((np.arange(height) + 0.5) * scale_y - 0.5, 0.0, src_h - 1.0)

    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    x1 = np.minimum(x0 + 1, src_w - 1)
    y1 = np.minimum(y0 + 1, src_h - 1)
    fx = xs - x0
    fy = ys - y0

    top = src[y0][:, x0] * ((1.0 - fy)[:, None] * (1.0 - fx)[None, :]) + src[y0][
        :, x1
    ] * ((1.0 - fy)[:, None] * fx[None, :])
    bottom = src[y1][:, x0] * (fy[:, None] * (1.0 - fx)[None, :]) + src[y1][:, x1] * (
        fy[:, None] * fx[None, :]
    )
    out[:, :] = top + bottom
    return out
