"""Binary sharp/blurry decision block over the high-frequency energy share.

A single thresholded feature keeps the gate deterministic and auditable:
an image is Sharp when the share of ring energy above the cutoff ring
meets the calibrated threshold. Calibration picks the threshold that
maximizes balanced accuracy on labeled sharp/blurry sets.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import EmptyClass, SchemaError, ZeroTotal
from .image_io import LumaPlane
from .ringspec import DEFAULT_RING_COUNT, compute_ring_spectrum, high_frequency_share

logger = logging.getLogger(__name__)


class FocusLabel(Enum):
    SHARP = "sharp"
    BLURRY = "blurry"


@dataclass(frozen=True)
class FocusModel:
    ring_count: int
    cutoff_ring: int
    threshold: float
    balanced_accuracy: float
    n_sharp: int
    n_blurry: int

    def __post_init__(self):
        if self.ring_count < 2:
            raise ValueError(f"ring_count must be >= 2, got {self.ring_count}")
        if not 0 <= self.cutoff_ring < self.ring_count:
            raise ValueError(
                f"cutoff_ring must be in [0, {self.ring_count}), got {self.cutoff_ring}"
            )
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if not 0.5 <= self.balanced_accuracy <= 1.0:
            raise ValueError(
                f"balanced accuracy must be in [0.5, 1], got {self.balanced_accuracy}"
            )
        if self.n_sharp < 1 or self.n_blurry < 1:
            raise ValueError("calibration set sizes must be >= 1")


def sharpness_feature(plane: LumaPlane, ring_count: int, cutoff_ring: int) -> float:
    """High-frequency energy share of one plane (the classifier's only feature)."""
    return high_frequency_share(compute_ring_spectrum(plane, ring_count), cutoff_ring)


def _balanced_accuracy(sharp_feats, blurry_feats, threshold: float) -> float:
    tpr = sum(f >= threshold for f in sharp_feats) / len(sharp_feats)
    tnr = sum(f < threshold for f in blurry_feats) / len(blurry_feats)
    return (tpr + tnr) / 2.0


def calibrate(
    sharp,
    blurry,
    ring_count: int = DEFAULT_RING_COUNT,
    cutoff_ring: int | None = None,
) -> FocusModel:
    """Fit the decision threshold from labeled sharp and blurry planes.

    Candidate thresholds are the observed feature values and the midpoints
    between consecutive distinct values; the winner maximizes balanced
    accuracy, with ties broken toward the larger margin from the nearest
    feature, then toward the lower threshold.
    """
    sharp = list(sharp)
    blurry = list(blurry)
    if not sharp or not blurry:
        raise EmptyClass("calibration needs at least one sharp and one blurry image")
    if cutoff_ring is None:
        cutoff_ring = ring_count // 2
    sharp_feats = [sharpness_feature(p, ring_count, cutoff_ring) for p in sharp]
    blurry_feats = [sharpness_feature(p, ring_count, cutoff_ring) for p in blurry]

    values = sorted(set(sharp_feats) | set(blurry_feats))
    candidates = list(values)
    candidates += [(a + b) / 2.0 for a, b in zip(values, values[1:])]

    def margin(t):
        return min(abs(t - v) for v in values)

    best = max(
        candidates,
        key=lambda t: (_balanced_accuracy(sharp_feats, blurry_feats, t), margin(t), -t),
    )
    return FocusModel(
        ring_count=ring_count,
        cutoff_ring=cutoff_ring,
        threshold=best,
        balanced_accuracy=_balanced_accuracy(sharp_feats, blurry_feats, best),
        n_sharp=len(sharp_feats),
        n_blurry=len(blurry_feats),
    )


def classify(plane: LumaPlane, model: FocusModel) -> FocusLabel:
    """Sharp iff the high-frequency share meets the threshold (>= convention).

    A blank image has no spectrum to judge; it is routed Blurry (toward
    enhancement) and logged rather than failing the batch.
    """
    try:
        feature = sharpness_feature(plane, model.ring_count, model.cutoff_ring)
    except ZeroTotal:
        logger.info("blank image routed to blurry (zero spectrum)")
        return FocusLabel.BLURRY
    return FocusLabel.SHARP if feature >= model.threshold else FocusLabel.BLURRY


def save_focus_model(model: FocusModel, path) -> None:
    """Persist a model as a flat human-inspectable key-value file."""
    lines = [
        f"ring_count = {model.ring_count}",
        f"cutoff_ring = {model.cutoff_ring}",
        f"threshold = {model.threshold!r}",
        f"balanced_accuracy = {model.balanced_accuracy!r}",
        f"n_sharp = {model.n_sharp}",
        f"n_blurry = {model.n_blurry}",
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_focus_model(path) -> FocusModel:
    fields = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        return FocusModel(
            ring_count=int(fields["ring_count"]),
            cutoff_ring=int(fields["cutoff_ring"]),
            threshold=float(fields["threshold"]),
            balanced_accuracy=float(fields["balanced_accuracy"]),
            n_sharp=int(fields["n_sharp"]),
            n_blurry=int(fields["n_blurry"]),
        )
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"malformed focus model file {path}: {exc}") from exc
