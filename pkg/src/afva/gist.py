"""Holistic scene descriptor: oriented band-pass filter energies averaged
over a coarse spatial grid.

The bank holds 32 frequency-domain transfer functions (4 scales x 8
orientations). Filtering multiplies in the frequency domain, inverts, and
takes magnitudes, i.e. circular convolution with a complex quadrature
kernel; cell-averaging a 4x4 grid of those magnitudes gives 32 * 16 = 512
values.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from afva.imaging import ImageGray, resize_bilinear

N_SCALES = 4
N_ORIENTATIONS = 8
GRID = 4
GIST_DIM = N_SCALES * N_ORIENTATIONS * GRID * GRID

# Highest center frequency (cycles/pixel); halves at each coarser scale.
BASE_FREQUENCY = 0.25
# Radial log-Gaussian bandwidth parameter.
RADIAL_SIGMA = 0.65
# Angular Gaussian sigma as a fraction of the orientation spacing.
ANGULAR_SPACING_RATIO = 1.3


@dataclass(frozen=True)
class GaborBank:
    """Immutable stack of transfer functions, shape (32, n, n), real >= 0."""

    resolution: int
    transfers: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "transfers", np.ascontiguousarray(self.transfers))
        self.transfers.setflags(write=False)


def build_gabor_bank(n: int) -> GaborBank:
    """Construct the 32-filter bank at resolution n x n.

    n must be a power of two, at least 16, so the 4x4 grid divides evenly.
    Filters are log-Gabor style: a log-Gaussian radial band times a one-sided
    angular Gaussian, which makes the spatial kernel a complex quadrature
    pair. The DC coefficient is forced to zero (zero-mean in space).
    """
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"bank resolution must be a power of two >= 16, got {n}")

    fx = np.fft.fftfreq(n)[None, :]
    fy = np.fft.fftfreq(n)[:, None]
    radius = np.hypot(fx, fy)
    angle = np.arctan2(fy, fx)

    # Avoid log(0) at DC; the DC entry is zeroed afterwards.
    safe_radius = radius.copy()
    safe_radius[0, 0] = 1.0

    log_sigma = np.log(RADIAL_SIGMA)
    theta_sigma = (np.pi / N_ORIENTATIONS) / ANGULAR_SPACING_RATIO

    transfers = np.empty((N_SCALES * N_ORIENTATIONS, n, n))
    i = 0
    for scale in range(N_SCALES):
        f0 = BASE_FREQUENCY / 2.0**scale
        radial = np.exp(-(np.log(safe_radius / f0) ** 2) / (2.0 * log_sigma**2))
        radial[0, 0] = 0.0
        for k in range(N_ORIENTATIONS):
            theta = k * np.pi / N_ORIENTATIONS
            delta = np.arctan2(np.sin(angle - theta), np.cos(angle - theta))
            angular = np.exp(-(delta**2) / (2.0 * theta_sigma**2))
            transfers[i] = radial * angular
            i += 1
    return GaborBank(resolution=n, transfers=transfers)


@lru_cache(maxsize=4)
def cached_bank(n: int) -> GaborBank:
    return build_gabor_bank(n)


def _grid_means(magnitude: np.ndarray) -> np.ndarray:
    n = magnitude.shape[0]
    cell = n // GRID
    return magnitude.reshape(GRID, cell, GRID, cell).mean(axis=(1, 3)).ravel()


def gist(img: ImageGray, bank: GaborBank) -> np.ndarray:
    """512-value descriptor: per filter, the 4x4 grid of mean response
    magnitudes, concatenated filter-major with row-major cells."""
    n = bank.resolution
    if img.pixels.shape != (n, n):
        img = resize_bilinear(img, n, n)
    spectrum = np.fft.fft2(img.pixels)
    out = np.empty(len(bank.transfers) * GRID * GRID)
    for i, transfer in enumerate(bank.transfers):
        magnitude = np.abs(np.fft.ifft2(spectrum * transfer))
        out[i * GRID * GRID : (i + 1) * GRID * GRID] = _grid_means(magnitude)
    return out
