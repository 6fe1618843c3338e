"""PNG loading/saving, pixel containers, and luminance conversion.

Every metric downstream operates on the luminance plane (BT.601 full-range
weights). Images are 8-bit PNG, grayscale or RGB; alpha, palette and 16-bit
files are rejected rather than silently converted.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import UnsupportedFormat

# BT.601 full-range luma weights (R, G, B)
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

# LumaPlane values may exceed [0, 255] by at most this much (float rounding)
RANGE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit image, samples shaped (height, width, channels), channels 1 or 3."""

    samples: np.ndarray

    def __post_init__(self):
        arr = self.samples
        if not isinstance(arr, np.ndarray) or arr.dtype != np.uint8:
            raise ValueError("RasterImage samples must be a uint8 ndarray")
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image dimensions must be positive, got {arr.shape[:2]}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def channels(self) -> int:
        return self.samples.shape[2]

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self.samples.shape == other.samples.shape and np.array_equal(
            self.samples, other.samples
        )


@dataclass(frozen=True, eq=False)
class LumaPlane:
    """Real-valued luminance plane in [0, 255], shaped (height, width).

    Kept unrounded so DFT/SSIM downstream are not quantization-noised.
    """

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected non-empty (h, w) samples, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("luminance samples must be finite")
        if arr.min() < -RANGE_TOLERANCE or arr.max() > 255.0 + RANGE_TOLERANCE:
            raise ValueError(
                f"luminance samples outside [0, 255]: range "
                f"[{arr.min()}, {arr.max()}]"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LumaPlane):
            return NotImplemented
        return self.samples.shape == other.samples.shape and np.array_equal(
            self.samples, other.samples
        )


def load_image(path) -> RasterImage:
    """Load an 8-bit grayscale or RGB PNG.

    Raises FileNotFoundError for missing files and UnsupportedFormat for
    anything that is not a plain 8-bit PNG (16-bit, palette, alpha, other
    container formats).
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such image file: {p}")
    with Image.open(p) as im:
        if im.format != "PNG":
            raise UnsupportedFormat(f"{p}: expected PNG, got {im.format}")
        if im.mode == "L":
            arr = np.asarray(im)[:, :, None]
        elif im.mode == "RGB":
            arr = np.asarray(im)
        else:
            raise UnsupportedFormat(
                f"{p}: unsupported PNG mode {im.mode!r} "
                "(only 8-bit grayscale 'L' and 'RGB' are accepted)"
            )
    return RasterImage(arr)


def save_image(img: RasterImage, path) -> None:
    """Write a RasterImage as PNG; load_image(save_image(x)) == x bit-exactly."""
    if img.channels == 1:
        pil = Image.fromarray(img.samples[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(img.samples, mode="RGB")
    pil.save(Path(path), format="PNG")


def to_luma(img: RasterImage) -> LumaPlane:
    """Luminance plane of an image: BT.601 weights for RGB, identity for grayscale."""
    samples = img.samples.astype(np.float64)
    if img.channels == 1:
        luma = samples[:, :, 0]
    else:
        luma = samples @ np.asarray(LUMA_WEIGHTS)
    return LumaPlane(luma)


def plane_to_image(plane: LumaPlane) -> RasterImage:
    """Quantize a luminance plane to an 8-bit grayscale image (round half to even)."""
    q = np.clip(np.rint(plane.samples), 0, 255).astype(np.uint8)
    return RasterImage(q[:, :, None])
