"""Full-reference quality metrics (PSNR, SSIM), LPIPS sidecar ingestion,
and dataset-level PSNR histograms.

PSNR and SSIM are computed on the luminance plane. LPIPS needs a pretrained
network, so it is only ever read from a sidecar CSV, never computed here;
a missing value stays None and is reported as "n/a" downstream, never 0.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve

from .errors import DimensionMismatch, DimensionTooSmall, EmptyInput, SchemaError
from .image_io import LumaPlane, RasterImage, to_luma

PEAK = 255.0

# Wang et al. defaults
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityScores:
    """PSNR/SSIM computed for a pair, plus the optional LPIPS sidecar value."""

    psnr: float
    ssim: float
    lpips: float | None = None

    def __post_init__(self):
        if math.isnan(self.psnr) or self.psnr < 0.0:
            raise ValueError(f"psnr must be >= 0 dB or +inf, got {self.psnr}")
        if not -1.0 - 1e-9 <= self.ssim <= 1.0 + 1e-9:
            raise ValueError(f"ssim must be in [-1, 1], got {self.ssim}")
        if self.lpips is not None and not self.lpips >= 0.0:
            raise ValueError(f"lpips must be >= 0, got {self.lpips}")


@dataclass(frozen=True)
class PsnrHistogram:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    overflow: int  # dedicated bin for infinite PSNR (identical pairs)
    total: int

    def __post_init__(self):
        if sum(self.counts) + self.overflow != self.total:
            raise ValueError("histogram counts do not sum to total")
        edges = np.asarray(self.bin_edges)
        if edges.size and np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be strictly ascending")

    @property
    def support(self) -> float:
        """Width of the covered finite-PSNR range in dB (0 for empty bins)."""
        if len(self.bin_edges) < 2:
            return 0.0
        return float(self.bin_edges[-1] - self.bin_edges[0])


def _check_same_dims(a, b):
    if (a.height, a.width) != (b.height, b.width):
        raise DimensionMismatch(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def psnr(reference: LumaPlane, test: LumaPlane) -> float:
    """10*log10(255^2 / MSE) in dB; +inf when the planes are identical."""
    _check_same_dims(reference, test)
    diff = reference.samples - test.samples
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords[:, None] ** 2 + coords[None, :] ** 2) / (2.0 * sigma * sigma))
    return g / g.sum()


_WINDOW = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)


def ssim(reference: LumaPlane, test: LumaPlane) -> float:
    """Mean local SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03, L=255.

    Local statistics use valid-mode convolution, so both dimensions must be
    at least the window size.
    """
    _check_same_dims(reference, test)
    if min(reference.height, reference.width) < SSIM_WINDOW:
        raise DimensionTooSmall(
            f"SSIM needs both dimensions >= {SSIM_WINDOW}, "
            f"got {reference.width}x{reference.height}"
        )
    x = reference.samples
    y = test.samples
    c1 = (SSIM_K1 * PEAK) ** 2
    c2 = (SSIM_K2 * PEAK) ** 2

    mu_x = fftconvolve(x, _WINDOW, mode="valid")
    mu_y = fftconvolve(y, _WINDOW, mode="valid")
    var_x = fftconvolve(x * x, _WINDOW, mode="valid") - mu_x * mu_x
    var_y = fftconvolve(y * y, _WINDOW, mode="valid") - mu_y * mu_y
    cov = fftconvolve(x * y, _WINDOW, mode="valid") - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def compare_pair(hq: RasterImage, lq: RasterImage, lpips: float | None = None) -> QualityScores:
    """Convert both images to luma, compute PSNR/SSIM, attach the LPIPS sidecar value."""
    if (hq.height, hq.width) != (lq.height, lq.width):
        raise DimensionMismatch(
            f"dimension mismatch: {hq.width}x{hq.height} vs {lq.width}x{lq.height}"
        )
    ref = to_luma(hq)
    test = to_luma(lq)
    return QualityScores(psnr=psnr(ref, test), ssim=ssim(ref, test), lpips=lpips)


def psnr_histogram(scores, bin_width: float) -> PsnrHistogram:
    """Histogram the PSNR values of a score collection.

    Bins are half-open [edge, edge + width) starting at the minimum finite
    value; infinite PSNRs land in a dedicated overflow bin so counts stay
    conserved.
    """
    if bin_width <= 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    values = [s.psnr if isinstance(s, QualityScores) else float(s) for s in scores]
    if not values:
        raise EmptyInput("cannot histogram an empty score collection")
    finite = np.array([v for v in values if math.isfinite(v)])
    overflow = len(values) - finite.size
    if finite.size == 0:
        return PsnrHistogram(bin_edges=(), counts=(), overflow=overflow, total=len(values))
    lo = float(finite.min())
    n_bins = int(math.floor((float(finite.max()) - lo) / bin_width)) + 1
    edges = lo + bin_width * np.arange(n_bins + 1)
    counts, _ = np.histogram(finite, bins=edges)
    return PsnrHistogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
        overflow=overflow,
        total=len(values),
    )


def load_lpips_sidecar(path) -> dict[str, float]:
    """Read an `image_id,lpips` CSV produced by an external LPIPS run."""
    p = Path(path)
    with open(p, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["image_id", "lpips"]:
            raise SchemaError(f"{p}: expected header 'image_id,lpips', got {header}")
        out: dict[str, float] = {}
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise SchemaError(f"{p}:{row_num}: expected 2 columns, got {len(row)}")
            try:
                value = float(row[1])
            except ValueError as exc:
                raise SchemaError(f"{p}:{row_num}: bad lpips value {row[1]!r}") from exc
            if value < 0:
                raise SchemaError(f"{p}:{row_num}: lpips must be >= 0, got {value}")
            out[row[0]] = value
    return out
