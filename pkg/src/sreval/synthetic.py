"""Seeded synthetic image and pair generators for tests and demo scripts.

The real cytology dataset is private, so fixtures are generated: textured
planes with a natural-ish decaying spectrum, checkerboards for frequency
tests, pseudo-noise for the focus classifier, and two paired-degradation
generators (fixed-factor bicubic vs. the "dedicated" mix of variable blur
and noise, whose PSNR spread is intentionally wider).
"""
from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .image_io import LumaPlane
from .resample import KernelKind, degrade


def noise_plane(rng: np.random.Generator, height: int, width: int) -> LumaPlane:
    """Uniform pseudo-noise in [0, 255]."""
    return LumaPlane(rng.uniform(0.0, 255.0, size=(height, width)))


def checkerboard(size: int, cell: int = 4, low: float = 0.0, high: float = 255.0) -> LumaPlane:
    idx = np.arange(size) // cell
    pattern = (idx[:, None] + idx[None, :]) % 2
    return LumaPlane(np.where(pattern == 0, low, high))


def gaussian_blur(plane: LumaPlane, sigma: float) -> LumaPlane:
    """Gaussian blur with periodic borders, clipped back to [0, 255].

    Periodic (wrap) boundaries keep periodic fixtures periodic, so their
    DFT stays a clean line spectrum instead of growing edge skirts.
    """
    out = gaussian_filter(plane.samples, sigma=sigma, mode="wrap")
    return LumaPlane(np.clip(out, 0.0, 255.0))


def detailed_plane(rng: np.random.Generator, size: int = 256) -> LumaPlane:
    """Textured test plane with content at all scales.

    Smooth gradient base + band-limited noise + a few gratings + random
    rectangles, so progressive decimation keeps removing real structure
    (PSNR falls monotonically with the factor, like a natural image).
    """
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    base = 96.0 + 48.0 * (xx + yy) / (2 * size - 2)
    texture = gaussian_filter(rng.normal(0.0, 1.0, (size, size)), 1.0, mode="nearest")
    texture *= 36.0 / max(texture.std(), 1e-12)
    gratings = (
        14.0 * np.sin(2 * np.pi * xx / 7.0)
        + 11.0 * np.sin(2 * np.pi * yy / 11.0)
        + 8.0 * np.sin(2 * np.pi * (xx + yy) / 5.0)
    )
    blocks = np.zeros((size, size))
    for _ in range(12):
        h = int(rng.integers(size // 16, size // 3))
        w = int(rng.integers(size // 16, size // 3))
        top = int(rng.integers(0, size - h))
        left = int(rng.integers(0, size - w))
        blocks[top : top + h, left : left + w] += rng.uniform(-28.0, 28.0)
    return LumaPlane(np.clip(base + texture + gratings + blocks, 0.0, 255.0))


def bicubic_pair(
    rng: np.random.Generator, size: int = 48, factor: int = 2
) -> tuple[LumaPlane, LumaPlane]:
    """(original, fixed-factor bicubic degradation) pair."""
    original = detailed_plane(rng, size)
    return original, degrade(original, factor, KernelKind.BICUBIC)


def dedicated_pair(rng: np.random.Generator, size: int = 48) -> tuple[LumaPlane, LumaPlane]:
    """(original, variably damaged) pair mimicking hand-defocused acquisitions.

    Blur strength and additive noise vary per pair, so a population of these
    spans a much wider PSNR range than any fixed-factor generator.
    """
    original = detailed_plane(rng, size)
    sigma = float(rng.uniform(0.2, 4.0))
    noisy = gaussian_blur(original, sigma).samples + rng.normal(
        0.0, rng.uniform(0.0, 12.0), size=(size, size)
    )
    return original, LumaPlane(np.clip(noisy, 0.0, 255.0))
