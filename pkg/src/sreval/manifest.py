"""Paired-image dataset manifests: inventory, validation, spectrum splits.

A manifest is a JSON inventory of (high quality, low quality) image pairs.
Validation computes PSNR per pair and flags degenerate entries: infinite
PSNR means the two files are identical (the acquisition knob was never
moved), while PSNR below a floor (default 15 dB, unrelated scenes land
near 7-10 dB) suggests the files were mis-paired.

The spectrum split labels each pair with nested PSNR bands (narrow inside
middle inside wide) whose boundaries are percentiles of the observed PSNR
distribution, so subsets of increasing degradation spread can be carved
out of any dataset.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    DimensionMismatch,
    DuplicatePairId,
    EmptyManifest,
    MissingFile,
    SchemaError,
)
from .image_io import load_image, to_luma
from .metrics import psnr

MISPAIR_FLOOR_DB = 15.0
DEFAULT_BANDS = {"narrow": (40.0, 60.0), "middle": (25.0, 75.0), "wide": (0.0, 100.0)}
BAND_ORDER = ("narrow", "middle", "wide")


@dataclass(frozen=True)
class ImagePair:
    pair_id: str
    hq_path: Path
    lq_path: Path
    width: int
    height: int


@dataclass(frozen=True)
class SpectrumBand:
    band: str  # narrow | middle | wide
    psnr_low: float
    psnr_high: float

    def __post_init__(self):
        if self.band not in BAND_ORDER:
            raise ValueError(f"unknown band {self.band!r}")
        if self.psnr_low > self.psnr_high:
            raise ValueError(f"band {self.band}: low {self.psnr_low} > high {self.psnr_high}")

    def contains(self, value: float) -> bool:
        return self.psnr_low <= value <= self.psnr_high


@dataclass
class DatasetManifest:
    name: str
    pairs: list[ImagePair]
    notes: str = ""
    psnr_cache: dict[str, float] = field(default_factory=dict)
    band_labels: dict[str, list[str]] = field(default_factory=dict)
    bands: list[SpectrumBand] = field(default_factory=list)

    def pair(self, pair_id: str) -> ImagePair:
        for p in self.pairs:
            if p.pair_id == pair_id:
                return p
        raise KeyError(pair_id)


@dataclass(frozen=True)
class PairCheck:
    pair_id: str
    psnr: float
    flag: str  # ok | duplicate | mispaired


def _header_size(path: Path) -> tuple[int, int]:
    # PIL reads just the header here; no pixel decode
    with Image.open(path) as im:
        return im.size  # (width, height)


def load_manifest(path) -> DatasetManifest:
    """Load and validate a manifest JSON file.

    Relative image paths resolve against the manifest's directory. All
    missing files are collected into a single MissingFile error so a bad
    manifest is diagnosed in one pass.
    """
    p = Path(path)
    if not p.exists():
        raise MissingFile(str(p))
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "pairs" not in doc:
        raise SchemaError(f"{p}: manifest must be an object with a 'pairs' list")
    name = doc.get("name", p.stem)
    if not isinstance(doc["pairs"], list):
        raise SchemaError(f"{p}: 'pairs' must be a list")

    base = p.parent
    seen: set[str] = set()
    missing: list[str] = []
    pairs: list[ImagePair] = []
    for entry in doc["pairs"]:
        try:
            pair_id = str(entry["id"])
            hq = base / entry["hq"]
            lq = base / entry["lq"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{p}: pair entry must have id/hq/lq: {entry!r}") from exc
        if pair_id in seen:
            raise DuplicatePairId(pair_id)
        seen.add(pair_id)
        for fp in (hq, lq):
            if not fp.is_file():
                missing.append(str(fp))
        if missing:
            continue
        try:
            hq_size = _header_size(hq)
            lq_size = _header_size(lq)
        except UnidentifiedImageError as exc:
            raise SchemaError(f"{p}: unreadable image for pair {pair_id}: {exc}") from exc
        if hq_size != lq_size:
            raise DimensionMismatch(
                f"pair {pair_id}: hq is {hq_size[0]}x{hq_size[1]}, "
                f"lq is {lq_size[0]}x{lq_size[1]}"
            )
        pairs.append(
            ImagePair(pair_id=pair_id, hq_path=hq, lq_path=lq,
                      width=hq_size[0], height=hq_size[1])
        )
    if missing:
        raise MissingFile("missing image files:\n" + "\n".join(missing))

    manifest = DatasetManifest(name=str(name), pairs=pairs, notes=str(doc.get("notes", "")))
    cache = doc.get("psnr", {})
    if cache:
        if not isinstance(cache, dict):
            raise SchemaError(f"{p}: 'psnr' must map pair id to decibels")
        for k, v in cache.items():
            if k not in seen:
                raise SchemaError(f"{p}: psnr cache references unknown pair {k!r}")
            manifest.psnr_cache[k] = math.inf if v == "inf" else float(v)
    labels = doc.get("band_labels", {})
    if labels:
        manifest.band_labels = {str(k): [str(b) for b in v] for k, v in labels.items()}
    for b in doc.get("bands", []):
        try:
            manifest.bands.append(
                SpectrumBand(band=b["band"], psnr_low=float(b["psnr_low"]),
                             psnr_high=float(b["psnr_high"]))
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{p}: malformed band record {b!r}") from exc
    return manifest


def save_manifest(manifest: DatasetManifest, path) -> None:
    """Write a manifest back to JSON, including any cache/split sections.

    Image paths are stored relative to the output file when possible so a
    fixture tree stays relocatable; infinite PSNR serializes as "inf".
    """
    p = Path(path)
    base = p.parent.resolve()

    def rel(fp: Path) -> str:
        try:
            return os.path.relpath(fp.resolve(), base)
        except ValueError:  # different drive on windows
            return str(fp.resolve())

    doc: dict = {
        "name": manifest.name,
        "pairs": [
            {"id": q.pair_id, "hq": rel(q.hq_path), "lq": rel(q.lq_path)}
            for q in manifest.pairs
        ],
    }
    if manifest.notes:
        doc["notes"] = manifest.notes
    if manifest.psnr_cache:
        doc["psnr"] = {
            k: ("inf" if math.isinf(v) else v)
            for k, v in sorted(manifest.psnr_cache.items())
        }
    if manifest.band_labels:
        doc["band_labels"] = {k: list(v) for k, v in sorted(manifest.band_labels.items())}
    if manifest.bands:
        doc["bands"] = [
            {"band": b.band, "psnr_low": b.psnr_low, "psnr_high": b.psnr_high}
            for b in manifest.bands
        ]
    p.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def validate_pairs(manifest: DatasetManifest, floor_db: float = MISPAIR_FLOOR_DB) -> list[PairCheck]:
    """Compute PSNR for every pair, cache it, and flag suspect entries.

    Infinite PSNR -> "duplicate" (the two files carry identical pixels);
    PSNR below floor_db -> "mispaired"; anything else -> "ok".
    """
    report = []
    for q in manifest.pairs:
        value = psnr(to_luma(load_image(q.hq_path)), to_luma(load_image(q.lq_path)))
        manifest.psnr_cache[q.pair_id] = value
        if math.isinf(value):
            flag = "duplicate"
        elif value < floor_db:
            flag = "mispaired"
        else:
            flag = "ok"
        report.append(PairCheck(pair_id=q.pair_id, psnr=value, flag=flag))
    return report


def _check_band_spec(bands: dict) -> dict[str, tuple[float, float]]:
    spec = {}
    for name in BAND_ORDER:
        if name not in bands:
            raise ValueError(f"band spec missing {name!r}")
        lo, hi = float(bands[name][0]), float(bands[name][1])
        if not (0.0 <= lo <= hi <= 100.0):
            raise ValueError(f"band {name}: percentiles must satisfy 0 <= {lo} <= {hi} <= 100")
        spec[name] = (lo, hi)
    n, m, w = spec["narrow"], spec["middle"], spec["wide"]
    if not (w[0] <= m[0] <= n[0] and n[1] <= m[1] <= w[1]):
        raise ValueError(f"bands must nest narrow within middle within wide, got {spec}")
    return spec


def spectrum_split(manifest: DatasetManifest, bands: dict | None = None) -> DatasetManifest:
    """Label every pair with the nested PSNR bands that contain it.

    Band boundaries are percentiles (linear interpolation) of the finite
    cached PSNR values. The wide band covers every pair by construction,
    including duplicates whose PSNR is infinite.
    """
    if not manifest.pairs:
        raise EmptyManifest("cannot split an empty manifest")
    uncached = [q.pair_id for q in manifest.pairs if q.pair_id not in manifest.psnr_cache]
    if uncached:
        raise ValueError(
            f"pairs without cached psnr (run validate_pairs first): {uncached}"
        )
    spec = _check_band_spec(DEFAULT_BANDS if bands is None else bands)

    values = [manifest.psnr_cache[q.pair_id] for q in manifest.pairs]
    finite = [v for v in values if math.isfinite(v)]

    records = []
    if finite:
        pool = np.array(finite, dtype=float)
        for name in BAND_ORDER:
            lo_q, hi_q = spec[name]
            records.append(
                SpectrumBand(
                    band=name,
                    psnr_low=float(np.percentile(pool, lo_q)),
                    psnr_high=float(np.percentile(pool, hi_q)),
                )
            )
    else:
        # every pair is a duplicate: all values are +inf, so the degenerate
        # identical-values rule applies and each band collapses to (inf, inf)
        records = [
            SpectrumBand(band=name, psnr_low=math.inf, psnr_high=math.inf)
            for name in BAND_ORDER
        ]
    by_name = {b.band: b for b in records}

    labels: dict[str, list[str]] = {}
    for q in manifest.pairs:
        v = manifest.psnr_cache[q.pair_id]
        got = [name for name in BAND_ORDER if name != "wide" and by_name[name].contains(v)]
        got.append("wide")  # wide takes everything, by definition
        labels[q.pair_id] = got

    manifest.bands = records
    manifest.band_labels = labels
    return manifest


def write_split_csv(manifest: DatasetManifest, path) -> None:
    """Summarize a split as `band,psnr_low,psnr_high,count` rows."""
    if not manifest.bands:
        raise ValueError("manifest has no spectrum bands; run spectrum_split first")
    counts = {name: 0 for name in BAND_ORDER}
    for got in manifest.band_labels.values():
        for name in got:
            counts[name] += 1
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["band", "psnr_low", "psnr_high", "count"])
        for b in manifest.bands:
            writer.writerow([b.band, b.psnr_low, b.psnr_high, counts[b.band]])
