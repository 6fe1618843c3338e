"""Classical interpolation kernels, decimation, and the degradation simulator.

Resampling is separable convolution with pixel-center alignment
(src = (dst + 0.5) / scale - 0.5) and clamp-to-edge borders. When an axis
shrinks, the kernel footprint is widened by the inverse scale so minification
stays antialiased; nearest stays pure sampling. Bicubic is the Keys kernel
with a = -0.5, Lanczos uses a sinc window of support 2.

Decimation keeps every factor-th sample with no pre-filter: aliasing is part
of the simulated damage.
"""
from __future__ import annotations

import warnings
from enum import Enum

import numpy as np

from .errors import DimensionTooSmall
from .image_io import LumaPlane, RasterImage

# Scale factors used throughout the reference experiments; others only warn.
PARITY_FACTORS = (1, 2, 3, 4, 5)


class KernelKind(Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"
    LANCZOS2 = "lanczos2"
    BOX = "box"


def validate_scale_factor(value: int) -> int:
    """Check an integer scale factor; 1 is identity, >5 is accepted with a warning."""
    factor = int(value)
    if factor < 1:
        raise ValueError(f"scale factor must be >= 1, got {value}")
    if factor not in PARITY_FACTORS:
        warnings.warn(
            f"scale factor {factor} is outside the reference range {PARITY_FACTORS}",
            stacklevel=2,
        )
    return factor


def _keys_bicubic(x: np.ndarray) -> np.ndarray:
    # Keys cubic convolution, a = -0.5 (Catmull-Rom)
    a = -0.5
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    inner = (a + 2.0) * ax3 - (a + 3.0) * ax2 + 1.0
    outer = a * ax3 - 5.0 * a * ax2 + 8.0 * a * ax - 4.0 * a
    return np.where(ax <= 1.0, inner, np.where(ax < 2.0, outer, 0.0))


def _lanczos2(x: np.ndarray) -> np.ndarray:
    # sinc(x) * sinc(x/2) windowed to |x| < 2; np.sinc is the normalized sinc
    out = np.sinc(x) * np.sinc(x / 2.0)
    return np.where(np.abs(x) < 2.0, out, 0.0)


def _bilinear(x: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(x))


def _box(x: np.ndarray) -> np.ndarray:
    # half-open so a sample never lands in two adjacent footprints
    return np.where((x >= -0.5) & (x < 0.5), 1.0, 0.0)


_KERNELS = {
    KernelKind.BILINEAR: (_bilinear, 1.0),
    KernelKind.BICUBIC: (_keys_bicubic, 2.0),
    KernelKind.LANCZOS2: (_lanczos2, 2.0),
    KernelKind.BOX: (_box, 0.5),
}


def _axis_taps(src_len: int, dst_len: int, kernel: KernelKind):
    """Per-output-pixel source indices and normalized weights for one axis."""
    scale = dst_len / src_len
    centers = (np.arange(dst_len) + 0.5) / scale - 0.5
    if kernel is KernelKind.NEAREST:
        idx = np.floor((np.arange(dst_len) + 0.5) / scale).astype(np.int64)
        idx = np.clip(idx, 0, src_len - 1)
        return idx[:, None], np.ones((dst_len, 1))
    fn, radius = _KERNELS[kernel]
    filt_scale = max(1.0, 1.0 / scale)
    support = radius * filt_scale
    first = np.floor(centers - support).astype(np.int64)
    n_taps = int(np.ceil(2.0 * support)) + 2
    taps = first[:, None] + np.arange(n_taps)[None, :]
    weights = fn((taps - centers[:, None]) / filt_scale)
    weights = weights / weights.sum(axis=1, keepdims=True)
    return np.clip(taps, 0, src_len - 1), weights


def _resize_plane(src: np.ndarray, target_w: int, target_h: int, kernel: KernelKind) -> np.ndarray:
    out = src.astype(np.float64)
    if target_w != src.shape[1] or kernel is not KernelKind.NEAREST:
        idx, w = _axis_taps(src.shape[1], target_w, kernel)
        out = np.einsum("hwt,wt->hw", out[:, idx], w)
    if target_h != out.shape[0] or kernel is not KernelKind.NEAREST:
        idx, w = _axis_taps(out.shape[0], target_h, kernel)
        out = np.einsum("htw,ht->hw", out[idx, :], w)
    return out


def resize(image, target_w: int, target_h: int, kernel: KernelKind = KernelKind.BICUBIC):
    """Resample a LumaPlane or RasterImage to target_w x target_h.

    Results are clamped to [0, 255] after the separable passes so ringing
    kernels cannot push an 8-bit image out of range.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be positive, got {target_w}x{target_h}")
    if isinstance(image, LumaPlane):
        out = _resize_plane(image.samples, target_w, target_h, kernel)
        return LumaPlane(np.clip(out, 0.0, 255.0))
    if isinstance(image, RasterImage):
        chans = [
            _resize_plane(image.samples[:, :, c].astype(np.float64), target_w, target_h, kernel)
            for c in range(image.channels)
        ]
        stacked = np.clip(np.rint(np.stack(chans, axis=2)), 0, 255).astype(np.uint8)
        return RasterImage(stacked)
    raise TypeError(f"expected LumaPlane or RasterImage, got {type(image).__name__}")


def decimate(image, factor: int):
    """Keep every factor-th sample on both axes starting at index 0.

    Pure subsampling with no pre-filter; output dims are ceil(dim / factor).
    """
    factor = validate_scale_factor(factor)
    if factor == 1:
        return image
    h, w = image.height, image.width
    if h < factor or w < factor:
        raise DimensionTooSmall(
            f"cannot decimate {w}x{h} by factor {factor}: dimension smaller than factor"
        )
    if isinstance(image, LumaPlane):
        return LumaPlane(image.samples[::factor, ::factor])
    if isinstance(image, RasterImage):
        return RasterImage(image.samples[::factor, ::factor, :])
    raise TypeError(f"expected LumaPlane or RasterImage, got {type(image).__name__}")


def degrade(image, factor: int, kernel: KernelKind = KernelKind.BICUBIC):
    """Decimate by `factor`, then interpolate back to the original dimensions.

    The resolution-damage simulator: output has the input's dimensions but
    only 1/factor^2 of its samples survived the round trip. factor 1 is the
    identity.
    """
    factor = validate_scale_factor(factor)
    if factor == 1:
        return image
    small = decimate(image, factor)
    return resize(small, image.width, image.height, kernel)
