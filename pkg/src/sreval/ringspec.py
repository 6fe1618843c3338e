"""Frequency-domain sharpness metric: DFT magnitude energy grouped into rings.

The luminance plane is transformed with a 2D DFT, the zero-frequency bin is
shifted to the center, and each bin's radius is normalized by the
half-diagonal so the corners sit exactly at radius 1. The normalized radius
range [0, 1] is split into equal-width annuli; a ring's energy is the plain
(not squared) magnitude sum over its bins. Losing fine detail drains the
outer rings, which is what makes the per-ring energies a sharpness signal.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionTooSmall, ZeroTotal
from .image_io import LumaPlane

DEFAULT_RING_COUNT = 10
MIN_PLANE_DIM = 4


@dataclass(frozen=True)
class RingSpectrum:
    """Per-annulus DFT magnitude energies with their normalized radius bounds."""

    boundaries: tuple[float, ...]  # length ring_count + 1, 0 = r0 < ... < rN = 1
    energies: tuple[float, ...]
    total: float

    def __post_init__(self):
        if len(self.boundaries) != len(self.energies) + 1:
            raise ValueError("boundaries must have one more entry than energies")
        if len(self.energies) < 2:
            raise ValueError("a ring spectrum needs at least 2 rings")
        b = np.asarray(self.boundaries)
        if b[0] != 0.0 or b[-1] != 1.0 or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must ascend strictly from 0 to 1")
        if any(e < 0 for e in self.energies):
            raise ValueError("ring energies must be non-negative")

    @property
    def ring_count(self) -> int:
        return len(self.energies)


def compute_ring_spectrum(plane: LumaPlane, ring_count: int = DEFAULT_RING_COUNT) -> RingSpectrum:
    """Group the centered 2D DFT magnitudes of a plane into ring energies.

    Ring i covers normalized radius [i/N, (i+1)/N); the last ring is closed
    so radius 1 (the corners) belongs to it. Together the rings partition
    every frequency bin, so the energies sum to the total |F| mass.
    """
    if ring_count < 2:
        raise ValueError(f"ring_count must be >= 2, got {ring_count}")
    h, w = plane.height, plane.width
    if min(h, w) < MIN_PLANE_DIM:
        raise DimensionTooSmall(
            f"ring spectrum needs both dimensions >= {MIN_PLANE_DIM}, got {w}x{h}"
        )
    magnitude = np.abs(np.fft.fftshift(np.fft.fft2(plane.samples)))
    cy, cx = h // 2, w // 2
    rows = np.arange(h)[:, None] - cy
    cols = np.arange(w)[None, :] - cx
    r_max = float(np.hypot(cy, cx))
    radius = np.hypot(rows, cols) / r_max
    ring_index = np.minimum((radius * ring_count).astype(np.int64), ring_count - 1)
    energies = np.bincount(
        ring_index.ravel(), weights=magnitude.ravel(), minlength=ring_count
    )
    return RingSpectrum(
        boundaries=tuple(i / ring_count for i in range(ring_count + 1)),
        energies=tuple(float(e) for e in energies),
        total=float(energies.sum()),
    )


def high_frequency_share(spectrum: RingSpectrum, cutoff_ring: int) -> float:
    """Fraction of total ring energy at rings >= cutoff_ring, in [0, 1]."""
    if not 0 <= cutoff_ring < spectrum.ring_count:
        raise ValueError(
            f"cutoff_ring must be in [0, {spectrum.ring_count}), got {cutoff_ring}"
        )
    total = sum(spectrum.energies)
    if total <= 0.0:
        raise ZeroTotal("blank image: ring spectrum has zero total energy")
    return sum(spectrum.energies[cutoff_ring:]) / total


def emit_ring_bars(spectra, csv_path, svg_path=None) -> None:
    """Write labeled ring energies as CSV (and optionally a grouped-bar SVG).

    `spectra` is a sequence of (label, RingSpectrum) sharing one ring count.
    CSV columns: label,ring_index,r_min,r_max,energy.
    """
    spectra = list(spectra)
    if not spectra:
        raise ValueError("no spectra to emit")
    ring_count = spectra[0][1].ring_count
    for label, spec in spectra:
        if spec.ring_count != ring_count:
            raise ValueError(
                f"spectrum {label!r} has {spec.ring_count} rings, expected {ring_count}"
            )
    with open(Path(csv_path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "ring_index", "r_min", "r_max", "energy"])
        for label, spec in spectra:
            for i, energy in enumerate(spec.energies):
                writer.writerow(
                    [label, i, spec.boundaries[i], spec.boundaries[i + 1], energy]
                )
    if svg_path is not None:
        _write_bar_svg(spectra, ring_count, svg_path)


def _write_bar_svg(spectra, ring_count, path, width=1000, height=400) -> None:
    # inspection aid only; no bit-exact contract
    peak = max(max(spec.energies) for _, spec in spectra) or 1.0
    margin = 40
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    group_w = plot_w / ring_count
    bar_w = group_w / (len(spectra) + 1)
    palette = ["#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for ring in range(ring_count):
        for k, (label, spec) in enumerate(spectra):
            bar_h = plot_h * spec.energies[ring] / peak
            x = margin + ring * group_w + k * bar_w
            y = margin + plot_h - bar_h
            color = palette[k % len(palette)]
            parts.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{bar_h:.2f}" fill="{color}"><title>{label} '
                f"ring {ring}: {spec.energies[ring]:.6g}</title></rect>"
            )
        parts.append(
            f'<text x="{margin + (ring + 0.5) * group_w:.2f}" y="{height - margin / 2:.2f}" '
            f'font-size="12" text-anchor="middle">{ring}</text>'
        )
    for k, (label, _) in enumerate(spectra):
        color = palette[k % len(palette)]
        y = margin / 2 + 14 * k
        parts.append(f'<rect x="{margin}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        parts.append(f'<text x="{margin + 14}" y="{y}" font-size="12">{label}</text>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts), encoding="utf-8")
