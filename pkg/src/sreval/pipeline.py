"""Batch orchestration: sharp/blurry routing, external SR, evaluation reports.

Super-resolution models run as subprocesses behind a strict file contract:
the command template takes `{input}` and `{output}` placeholders (each
exactly once), must exit 0, and must leave a PNG whose dimensions are the
input's times sr_scale (or unchanged when the tool resizes back itself).
Nothing model-specific lives in this package.

Segmentation predictions likewise arrive as COCO results files, one per
pipeline variant; the pipeline's job is routing and measurement, not
inference. Reports separate a canonical section (byte-stable across runs)
from wall-clock timings.
"""
from __future__ import annotations

import csv
import json
import math
import shlex
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import (
    BadOutputDims,
    MissingOutput,
    NonZeroExit,
    SchemaError,
    SrevalError,
    SrToolTimeout,
)
from .focus import FocusLabel, classify, load_focus_model
from .image_io import load_image, save_image, to_luma
from .manifest import DatasetManifest
from .metrics import QualityScores, compare_pair
from .resample import KernelKind, decimate, resize
from .segeval import (
    EvalSummary,
    evaluate,
    load_coco_detections,
    load_coco_ground_truth,
    percent_change,
)

DEFAULT_TIMEOUT_SECONDS = 300.0
VARIANT_CSV_HEADER = (
    "variant,segm_mAP_50,segm_mAP_75,segm_mAP_50_percent_change,segm_mAP_75_percent_change"
)


class OrderingMode(Enum):
    SR_FIRST = "sr-first"
    SUBSAMPLE_FIRST = "subsample-first"
    NONE = "none"


@dataclass(frozen=True)
class PipelineConfig:
    sr_command: str
    sr_scale: int
    ordering: OrderingMode = OrderingMode.NONE
    focus_model_path: Path | None = None
    workers: int = 1
    timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS

    def __post_init__(self):
        _check_template(self.sr_command)
        if self.sr_scale < 1:
            raise ValueError(f"sr_scale must be >= 1, got {self.sr_scale}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.timeout_seconds <= 0:
            raise ValueError(f"timeout_seconds must be positive, got {self.timeout_seconds}")

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "PipelineConfig":
        try:
            sr_command = doc["sr_command"]
            sr_scale = int(doc["sr_scale"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"pipeline config needs sr_command and sr_scale: {exc}") from exc
        ordering = OrderingMode(doc.get("ordering", "none"))
        focus = doc.get("focus_model")
        if focus is not None:
            focus = (base / focus) if base is not None else Path(focus)
        try:
            return cls(
                sr_command=sr_command,
                sr_scale=sr_scale,
                ordering=ordering,
                focus_model_path=focus,
                workers=int(doc.get("workers", 1)),
                timeout_seconds=float(doc.get("timeout_seconds", DEFAULT_TIMEOUT_SECONDS)),
            )
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc


def _check_template(template: str) -> None:
    for placeholder in ("{input}", "{output}"):
        n = template.count(placeholder)
        if n != 1:
            raise ValueError(
                f"sr command template must contain {placeholder} exactly once, found {n}: "
                f"{template!r}"
            )


def run_external_sr(cmd_template: str, input_path, output_path, sr_scale: int,
                    timeout: float = DEFAULT_TIMEOUT_SECONDS) -> None:
    """Invoke one external SR tool run and enforce the file contract."""
    _check_template(cmd_template)
    input_path = Path(input_path)
    output_path = Path(output_path)
    if not input_path.is_file():
        raise FileNotFoundError(str(input_path))
    argv = [
        tok.replace("{input}", str(input_path)).replace("{output}", str(output_path))
        for tok in shlex.split(cmd_template)
    ]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise SrToolTimeout(f"{argv[0]} exceeded {timeout}s on {input_path.name}") from exc
    if proc.returncode != 0:
        raise NonZeroExit(
            f"{argv[0]} exited {proc.returncode} on {input_path.name}; "
            f"stderr: {proc.stderr.strip()}"
        )
    if not output_path.is_file():
        raise MissingOutput(f"{argv[0]} exited 0 but wrote no file at {output_path}")
    src = load_image(input_path)
    out = load_image(output_path)
    scaled = (src.width * sr_scale, src.height * sr_scale)
    same = (src.width, src.height)
    actual = (out.width, out.height)
    if actual not in (scaled, same):
        raise BadOutputDims(
            f"{output_path.name}: expected {scaled[0]}x{scaled[1]} "
            f"(or {same[0]}x{same[1]}), got {actual[0]}x{actual[1]}"
        )


def _coerce_to(img, width: int, height: int):
    if (img.width, img.height) == (width, height):
        return img
    return resize(img, width, height, KernelKind.BICUBIC)


def _sr_to_file(config: PipelineConfig, image, work: Path, tag: str):
    """Round-trip an in-memory image through the external SR tool."""
    in_path = work / f"{tag}.in.png"
    out_path = work / f"{tag}.sr.png"
    save_image(image, in_path)
    run_external_sr(config.sr_command, in_path, out_path, config.sr_scale,
                    config.timeout_seconds)
    return load_image(out_path)


@dataclass(frozen=True)
class OrderingRow:
    image_id: str
    branch: str  # sr-first | subsample-first
    psnr: float
    ssim: float


@dataclass(frozen=True)
class OrderingResult:
    rows: tuple[OrderingRow, ...]

    def mean_psnr(self, branch: str) -> float:
        vals = [r.psnr for r in self.rows if r.branch == branch]
        if not vals:
            raise ValueError(f"no rows for branch {branch!r}")
        return sum(vals) / len(vals)

    def mean_ssim(self, branch: str) -> float:
        vals = [r.ssim for r in self.rows if r.branch == branch]
        return sum(vals) / len(vals)


def ordering_experiment(hq_paths, lq_paths, config: PipelineConfig, work_dir) -> OrderingResult:
    """Compare both orders of subsampling and SR against the HQ references.

    subsample-first decimates the LQ image down by sr_scale and asks SR to
    bring it back up; sr-first upscales with SR and then resizes back down
    (bicubic). Both branches end at the HQ grid, where PSNR/SSIM are taken.
    """
    hq_paths = [Path(p) for p in hq_paths]
    lq_paths = [Path(p) for p in lq_paths]
    if len(hq_paths) != len(lq_paths):
        raise ValueError(f"got {len(hq_paths)} hq paths but {len(lq_paths)} lq paths")
    if config.sr_scale < 1:
        raise ValueError("ordering experiment needs sr_scale >= 1")
    work = Path(work_dir)
    work.mkdir(parents=True, exist_ok=True)

    rows = []
    for hq_path, lq_path in zip(hq_paths, lq_paths):
        image_id = lq_path.stem
        hq = load_image(hq_path)
        lq = load_image(lq_path)
        scale = config.sr_scale

        small = decimate(lq, scale)
        up = _sr_to_file(config, small, work, f"{image_id}.subfirst")
        sub_first = _coerce_to(up, hq.width, hq.height)

        big = _sr_to_file(config, lq, work, f"{image_id}.srfirst")
        sr_first = _coerce_to(big, hq.width, hq.height)

        for branch, img in (("sr-first", sr_first), ("subsample-first", sub_first)):
            save_image(img, work / f"{image_id}.{branch}.png")
            q = compare_pair(hq, img)
            rows.append(OrderingRow(image_id=image_id, branch=branch,
                                    psnr=q.psnr, ssim=q.ssim))
    return OrderingResult(rows=tuple(rows))


# ---------------------------------------------------------------------------
# full pipeline runs


@dataclass(frozen=True)
class ImageRecord:
    image_id: str
    routed_to_sr: bool
    quality: QualityScores | None
    error: str | None = None  # "<Stage>: <ErrorClass>: <message>" when failed


@dataclass
class RunReport:
    records: list[ImageRecord]
    stage_counts: dict[str, dict[str, int]]
    variants: dict[str, EvalSummary]
    baseline: str | None
    timings: dict[str, float] = field(default_factory=dict)

    def percent_columns(self) -> dict[str, dict[str, float | None]]:
        """Percent change per variant vs the baseline, recomputed on demand."""
        out: dict[str, dict[str, float | None]] = {}
        base = self.variants.get(self.baseline) if self.baseline else None
        for name, summary in self.variants.items():
            if base is None:
                out[name] = {"segm_mAP_50": None, "segm_mAP_75": None}
            else:
                # a zero-AP baseline admits no percent change; leave the cell blank
                out[name] = {
                    "segm_mAP_50": percent_change(base.ap50, summary.ap50)
                    if base.ap50 > 0 else None,
                    "segm_mAP_75": percent_change(base.ap75, summary.ap75)
                    if base.ap75 > 0 else None,
                }
        return out

    def canonical(self) -> dict:
        """Everything reproducible: excludes timings by construction."""
        doc = {
            "records": [
                {
                    "image_id": r.image_id,
                    "routed_to_sr": r.routed_to_sr,
                    "quality": None
                    if r.quality is None
                    else {
                        "psnr": "inf" if math.isinf(r.quality.psnr) else r.quality.psnr,
                        "ssim": r.quality.ssim,
                        "lpips": r.quality.lpips,
                    },
                    "error": r.error,
                }
                for r in self.records
            ],
            "stage_counts": self.stage_counts,
            "variants": {k: v.to_dict() for k, v in self.variants.items()},
            "baseline": self.baseline,
            "percent_change": self.percent_columns(),
        }
        return doc

    def write(self, out_dir) -> tuple[Path, Path]:
        """Emit report.json and variants.csv; returns both paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        report_path = out / "report.json"
        doc = {"canonical": self.canonical(), "timings": self.timings}
        report_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
        csv_path = out / "variants.csv"
        percents = self.percent_columns()
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(VARIANT_CSV_HEADER.split(","))
            for name, summary in self.variants.items():
                pc = percents[name]
                writer.writerow([
                    name,
                    summary.ap50,
                    summary.ap75,
                    "" if pc["segm_mAP_50"] is None else f"{pc['segm_mAP_50']:.2f}",
                    "" if pc["segm_mAP_75"] is None else f"{pc['segm_mAP_75']:.2f}",
                ])
        return report_path, csv_path


def _process_one(pair, config: PipelineConfig, model, work: Path,
                 lpips_by_id: dict[str, float] | None):
    """Classify, optionally SR, and score one pair. Never raises."""
    image_id = pair.pair_id
    stages: list[tuple[str, bool]] = []
    routed = True
    quality = None
    error = None
    try:
        lq = load_image(pair.lq_path)
        if model is not None:
            try:
                routed = classify(to_luma(lq), model) is FocusLabel.BLURRY
                stages.append(("classify", True))
            except SrevalError as exc:
                stages.append(("classify", False))
                raise exc
        final = lq
        if routed:
            try:
                up = _sr_to_file(config, lq, work, image_id)
                final = _coerce_to(up, lq.width, lq.height)
                stages.append(("sr", True))
            except (SrevalError, FileNotFoundError) as exc:
                stages.append(("sr", False))
                raise exc
        try:
            hq = load_image(pair.hq_path)
            lpips = lpips_by_id.get(image_id) if lpips_by_id else None
            quality = compare_pair(hq, final, lpips=lpips)
            stages.append(("metrics", True))
        except SrevalError as exc:
            stages.append(("metrics", False))
            raise exc
    except Exception as exc:  # fail-soft: one bad image must not sink the batch
        stage = stages[-1][0] if stages and not stages[-1][1] else "load"
        error = f"{stage}: {type(exc).__name__}: {exc}"
    record = ImageRecord(image_id=image_id, routed_to_sr=routed,
                         quality=quality, error=error)
    return record, stages


def run_pipeline(manifest: DatasetManifest, gt_path, detections: dict[str, str | Path],
                 config: PipelineConfig, work_dir, baseline: str | None = None,
                 lpips_by_id: dict[str, float] | None = None) -> RunReport:
    """Route every pair through the decision block and SR, then evaluate.

    detections maps variant name to a COCO results file; each variant is
    evaluated against the ground truth and reported next to its percent
    change vs the baseline variant (default: the first one given).
    Per-image failures are recorded, not raised; stage counters satisfy
    failed + succeeded == total.
    """
    work = Path(work_dir)
    work.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()

    model = load_focus_model(config.focus_model_path) if config.focus_model_path else None

    results: dict[str, tuple[ImageRecord, list]] = {}
    if config.workers == 1:
        for pair in manifest.pairs:
            results[pair.pair_id] = _process_one(pair, config, model, work, lpips_by_id)
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            futures = {
                pair.pair_id: pool.submit(_process_one, pair, config, model, work, lpips_by_id)
                for pair in manifest.pairs
            }
            for pair_id, fut in futures.items():
                results[pair_id] = fut.result()
    t_images = time.monotonic()

    # aggregate in manifest order regardless of completion order
    records = []
    stage_counts: dict[str, dict[str, int]] = {}
    for pair in manifest.pairs:
        record, stages = results[pair.pair_id]
        records.append(record)
        for stage, ok in stages:
            bucket = stage_counts.setdefault(stage, {"succeeded": 0, "failed": 0, "total": 0})
            bucket["succeeded" if ok else "failed"] += 1
            bucket["total"] += 1

    variants: dict[str, EvalSummary] = {}
    if detections:
        gt_records, images, _ = load_coco_ground_truth(gt_path)
        for name, det_path in detections.items():
            det = load_coco_detections(det_path, images)
            variants[name] = evaluate(gt_records, det)
        if baseline is None:
            baseline = next(iter(detections))
        elif baseline not in variants:
            raise ValueError(f"baseline {baseline!r} is not one of {sorted(variants)}")
    t_end = time.monotonic()

    return RunReport(
        records=records,
        stage_counts=stage_counts,
        variants=variants,
        baseline=baseline if variants else None,
        timings={
            "images_seconds": round(t_images - t0, 6),
            "evaluation_seconds": round(t_end - t_images, 6),
            "total_seconds": round(t_end - t0, 6),
        },
    )


# ---------------------------------------------------------------------------
# job files: one JSON driving a whole pipeline invocation


@dataclass(frozen=True)
class PipelineJob:
    config: PipelineConfig
    manifest_path: Path
    gt_path: Path | None
    detections: dict[str, Path]
    baseline: str | None


def load_job(path) -> PipelineJob:
    """Parse a pipeline job file; relative paths resolve against it."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{p}: job file must be a JSON object")
    base = p.parent
    config = PipelineConfig.from_dict(doc, base=base)
    try:
        manifest_path = base / doc["manifest"]
    except KeyError as exc:
        raise SchemaError(f"{p}: job file needs a 'manifest' path") from exc
    gt = doc.get("gt")
    det = doc.get("detections", {})
    if det and gt is None:
        raise SchemaError(f"{p}: 'detections' requires a 'gt' path")
    if not isinstance(det, dict):
        raise SchemaError(f"{p}: 'detections' must map variant name to a results file")
    baseline = doc.get("baseline")
    if baseline is not None and baseline not in det:
        raise SchemaError(f"{p}: baseline {baseline!r} not among detections variants")
    return PipelineJob(
        config=config,
        manifest_path=manifest_path,
        gt_path=(base / gt) if gt is not None else None,
        detections={str(k): base / v for k, v in det.items()},
        baseline=baseline,
    )
