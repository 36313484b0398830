"""Image decoding, color-space conversion, and resizing primitives.

Pixels are stored as float64 in [0, 1] so downstream feature math is
precision-independent. All functions are pure; the types are immutable
carriers around NumPy arrays.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from afva import kernels
from afva.errors import DecodeError

SUPPORTED_FORMATS = {"PNG", "JPEG"}

# ITU-R BT.601 luma coefficients.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class ImageRgb:
    """Decoded raster; ``pixels`` has shape (height, width, 3) in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixel array, got shape {p.shape}")
        if p.size and (p.min() < 0.0 or p.max() > 1.0):
            raise ValueError("channel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", np.ascontiguousarray(p, dtype=np.float64))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.width * self.height


@dataclass(frozen=True)
class ImageGray:
    """Single-channel raster; ``pixels`` has shape (height, width) in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2:
            raise ValueError(f"expected (h, w) pixel array, got shape {p.shape}")
        object.__setattr__(self, "pixels", np.ascontiguousarray(p, dtype=np.float64))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class HsvPixel:
    """Hexcone HSV: h in degrees [0, 360), s and v in [0, 1]; h = 0 when s = 0."""

    h: float
    s: float
    v: float


def decode(data: bytes) -> ImageRgb:
    """Decode a PNG or JPEG byte stream into a normalized ImageRgb.

    8-bit channel value c maps to c / 255. Malformed or truncated streams
    raise DecodeError naming the cause.
    """
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise DecodeError(f"unsupported image format: {img.format}")
            rgb = img.convert("RGB")
            rgb.load()
    except UnidentifiedImageError as exc:
        raise DecodeError(f"not a decodable image stream: {exc}") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"corrupt image stream: {exc}") from exc
    pixels = np.asarray(rgb, dtype=np.float64) / 255.0
    return ImageRgb(pixels)


def decode_file(path) -> ImageRgb:
    with open(path, "rb") as fh:
        return decode(fh.read())


def to_gray(img: ImageRgb) -> ImageGray:
    """BT.601 luma: y = 0.299 r + 0.587 g + 0.114 b."""
    return ImageGray(img.pixels @ LUMA_WEIGHTS)


def rgb_to_hsv(r: float, g: float, b: float) -> HsvPixel:
    """Standard hexcone conversion for one pixel with channels in [0, 1]."""
    v = max(r, g, b)
    c = v - min(r, g, b)
    s = 0.0 if v == 0.0 else c / v
    if c == 0.0:
        h = 0.0
    elif v == r:
        h = 60.0 * (((g - b) / c) % 6.0)
    elif v == g:
        h = 60.0 * ((b - r) / c + 2.0)
    else:
        h = 60.0 * ((r - g) / c + 4.0)
    return HsvPixel(h % 360.0, s, v)


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[float, float, float]:
    """Inverse of rgb_to_hsv; h in degrees."""
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - abs(hp % 2.0 - 1.0))
    sector = int(math.floor(hp)) % 6
    r1, g1, b1 = [
        (c, x, 0.0),
        (x, c, 0.0),
        (0.0, c, x),
        (0.0, x, c),
        (x, 0.0, c),
        (c, 0.0, x),
    ][sector]
    m = v - c
    return (r1 + m, g1 + m, b1 + m)


def hsv_planes(img: ImageRgb) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized per-pixel HSV of a whole image, as (h, s, v) planes.

    Matches rgb_to_hsv exactly: h in degrees [0, 360), achromatic pixels get
    h = 0.
    """
    p = img.pixels
    r, g, b = p[..., 0], p[..., 1], p[..., 2]
    v = p.max(axis=2)
    c = v - p.min(axis=2)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)

    h = np.zeros_like(v)
    chromatic = c > 0
    safe_c = np.where(chromatic, c, 1.0)
    r_max = chromatic & (v == r)
    g_max = chromatic & ~r_max & (v == g)
    b_max = chromatic & ~r_max & ~g_max
    h = np.where(r_max, 60.0 * (((g - b) / safe_c) % 6.0), h)
    h = np.where(g_max, 60.0 * ((b - r) / safe_c + 2.0), h)
    h = np.where(b_max, 60.0 * ((r - g) / safe_c + 4.0), h)
    return h % 360.0, s, v


def resize_bilinear(img: ImageGray, width: int, height: int) -> ImageGray:
    """Resample to (width, height) with half-pixel centers and edge clamping."""
    if width < 1 or height < 1:
        raise ValueError(f"target size must be positive, got {width}x{height}")
    if img.pixels.size == 0:
        raise ValueError("cannot resize an empty image")
    return ImageGray(kernels.resize_bilinear(img.pixels, width, height))
