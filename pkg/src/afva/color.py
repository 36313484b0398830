"""Color feature block: RGB/HSV means, histogram-peak features, basic-color
composition, and pleasure/arousal/dominance scores.

The block layout is fixed: mean_rgb (3) | mean_hsv (3) | hsv_peak (6) |
basic_colors (11) | pad (3), 26 values total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from afva.imaging import ImageRgb, hsv_planes

COLOR_BLOCK_DIM = 26

DEFAULT_HSV_BINS = (16, 8, 8)

# Fixed prototype table for the 11 basic color names, nearest-neighbor
# assignment in RGB. The table is part of the feature contract and is
# documented in the README; ties break toward the earlier name.
BASIC_COLOR_NAMES = (
    "black",
    "blue",
    "brown",
    "grey",
    "green",
    "orange",
    "pink",
    "purple",
    "red",
    "white",
    "yellow",
)

BASIC_COLOR_PROTOTYPES = np.array(
    [
        (0.0, 0.0, 0.0),  # black
        (0.0, 0.0, 1.0),  # blue
        (0.5, 0.3, 0.1),  # brown
        (0.5, 0.5, 0.5),  # grey
        (0.0, 1.0, 0.0),  # green
        (1.0, 0.5, 0.0),  # orange
        (1.0, 0.75, 0.8),  # pink
        (0.5, 0.0, 0.5),  # purple
        (1.0, 0.0, 0.0),  # red
        (1.0, 1.0, 1.0),  # white
        (1.0, 1.0, 0.0),  # yellow
    ]
)

# Affine maps from (mean brightness Y, mean saturation S) to the three
# pleasure/arousal/dominance scores.
PAD_COEFFICIENTS = np.array(
    [
        (0.69, 0.22),  # pleasure
        (0.31, 0.60),  # arousal
        (0.76, 0.32),  # dominance
    ]
)


@dataclass(frozen=True)
class ColorFeatures:
    mean_rgb: np.ndarray  # 3
    mean_hsv: np.ndarray  # 3, hue normalized to [0, 1] by /360
    hsv_peak: np.ndarray  # 6: (argmax index / bin count, peak mass) per channel
    basic_colors: np.ndarray  # 11 pixel fractions, BASIC_COLOR_NAMES order
    pad: np.ndarray  # 3: pleasure, arousal, dominance

    def concat(self) -> np.ndarray:
        return np.concatenate(
            [self.mean_rgb, self.mean_hsv, self.hsv_peak, self.basic_colors, self.pad]
        )


def mean_colors(img: ImageRgb) -> tuple[np.ndarray, np.ndarray]:
    """Arithmetic channel means; hue is averaged circularly.

    Each pixel contributes a unit vector at its hue angle; a zero resultant
    (opposing hues cancel) yields hue 0. The returned hue is normalized by
    360 so all six values live in [0, 1].
    """
    if img.n_pixels == 0:
        raise ValueError("cannot average a zero-pixel image")
    mean_rgb = img.pixels.reshape(-1, 3).mean(axis=0)

    h, s, v = hsv_planes(img)
    radians = np.deg2rad(h)
    resultant = np.array([np.cos(radians).mean(), np.sin(radians).mean()])
    if np.hypot(*resultant) < 1e-12:
        mean_h = 0.0
    else:
        mean_h = np.rad2deg(np.arctan2(resultant[1], resultant[0])) % 360.0
        if mean_h >= 360.0:  # tiny negative angles wrap to exactly 360
            mean_h = 0.0
    mean_hsv = np.array([mean_h / 360.0, s.mean(), v.mean()])
    return mean_rgb, mean_hsv


def _channel_histogram(values: np.ndarray, n_bins: int, upper: float) -> np.ndarray:
    """Normalized histogram of values in [0, upper]; the top edge falls in
    the last bin."""
    idx = np.minimum((values / upper * n_bins).astype(np.int64), n_bins - 1)
    counts = np.bincount(idx.ravel(), minlength=n_bins)
    return counts / values.size


def hsv_peak(img: ImageRgb, bins: tuple[int, int, int] = DEFAULT_HSV_BINS) -> np.ndarray:
    """For each HSV channel: (argmax bin index / bin count, mass at argmax).

    Ties break toward the lowest bin index. Hue bins cover [0, 360), the
    others [0, 1].
    """
    if img.n_pixels == 0:
        raise ValueError("cannot histogram a zero-pixel image")
    nh, ns, nv = bins
    if min(nh, ns, nv) < 1:
        raise ValueError(f"bin counts must be >= 1, got {bins}")
    h, s, v = hsv_planes(img)
    out = []
    for values, n_bins, upper in ((h, nh, 360.0), (s, ns, 1.0), (v, nv, 1.0)):
        hist = _channel_histogram(values, n_bins, upper)
        peak = int(np.argmax(hist))
        out.extend((peak / n_bins, hist[peak]))
    return np.array(out)


def basic_color_composition(img: ImageRgb) -> np.ndarray:
    """Fraction of pixels nearest (Euclidean, RGB) to each of the 11
    prototype colors, in BASIC_COLOR_NAMES order."""
    flat = img.pixels.reshape(-1, 3)
    if flat.shape[0] == 0:
        return np.zeros(len(BASIC_COLOR_NAMES))
    # (n_pixels, 11) squared distances; argmin picks the earliest name on ties.
    d2 = ((flat[:, None, :] - BASIC_COLOR_PROTOTYPES[None, :, :]) ** 2).sum(axis=2)
    nearest = np.argmin(d2, axis=1)
    counts = np.bincount(nearest, minlength=len(BASIC_COLOR_NAMES))
    return counts / flat.shape[0]


def pad_scores(img: ImageRgb) -> np.ndarray:
    """Pleasure/arousal/dominance from mean brightness and saturation.

    Y is the mean of the HSV value plane, S the mean of the saturation plane:
    (0.69 Y + 0.22 S, 0.31 Y + 0.60 S, 0.76 Y + 0.32 S).
    """
    if img.n_pixels == 0:
        return np.zeros(3)
    _, s, v = hsv_planes(img)
    return PAD_COEFFICIENTS @ np.array([v.mean(), s.mean()])


def color_block(
    img: ImageRgb, hsv_bins: tuple[int, int, int] = DEFAULT_HSV_BINS
) -> ColorFeatures:
    """All color features of one image, in the fixed field order."""
    mean_rgb, mean_hsv = mean_colors(img)
    return ColorFeatures(
        mean_rgb=mean_rgb,
        mean_hsv=mean_hsv,
        hsv_peak=hsv_peak(img, hsv_bins),
        basic_colors=basic_color_composition(img),
        pad=pad_scores(img),
    )
