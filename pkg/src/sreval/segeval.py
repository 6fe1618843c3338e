"""COCO-style instance-segmentation evaluation on binary masks.

Matching follows the standard COCO convention: detections ranked by score
(ties by insertion order) are greedily
assigned to the unmatched ground-truth instance with the highest IoU at or
above the threshold, and AP is the 101-point interpolated area under the
precision-recall curve. segm_mAP averages AP over IoU thresholds
0.50:0.05:0.95 and over categories present in the ground truth.

avg_precision / avg_recall are macro precision/recall at a fixed operating
point (detections with score >= 0.5, IoU 0.50); per-class true-positive
counts use the same point. The PR arithmetic is kept in plain Python so the
result is reproducible bit-for-bit against a brute-force oracle.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from .errors import (
    BothEmpty,
    DegenerateVariance,
    EmptyGroundTruth,
    GridMismatch,
    SchemaError,
    ZeroBaseline,
)

IOU_THRESHOLDS = tuple(round(0.50 + 0.05 * i, 2) for i in range(10))
OPERATING_SCORE = 0.5  # score cutoff for the precision/recall operating point
OPERATING_IOU = 0.50
RECALL_POINTS = 101


def _freeze(mask: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class InstanceRecord:
    """One ground-truth instance: a binary mask on its image grid."""

    image_id: int | str
    category_id: int
    mask: np.ndarray
    area: int = field(default=-1)

    def __post_init__(self):
        object.__setattr__(self, "mask", _freeze(self.mask))
        true_area = int(self.mask.sum())
        if self.area == -1:
            object.__setattr__(self, "area", true_area)
        elif self.area != true_area:
            raise ValueError(f"area {self.area} != mask population {true_area}")
        if self.area <= 0:
            raise ValueError("instance mask must be non-empty")


@dataclass(frozen=True, eq=False)
class Detection:
    """One predicted instance with a confidence score in [0, 1]."""

    image_id: int | str
    category_id: int
    mask: np.ndarray
    score: float

    def __post_init__(self):
        object.__setattr__(self, "mask", _freeze(self.mask))
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [0, 1], got {self.score}")


@dataclass(frozen=True)
class EvalSummary:
    segm_map: float  # mean AP over IoU 0.50:0.05:0.95
    ap50: float
    ap75: float
    avg_precision: float
    avg_recall: float
    per_class_tp: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "segm_mAP": self.segm_map,
            "segm_mAP_50": self.ap50,
            "segm_mAP_75": self.ap75,
            "avg_precision": self.avg_precision,
            "avg_recall": self.avg_recall,
            "per_class_tp": {str(k): v for k, v in sorted(self.per_class_tp.items())},
        }


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection-over-union of two binary masks on the same grid."""
    if a.shape != b.shape:
        raise GridMismatch(f"mask grids differ: {a.shape} vs {b.shape}")
    inter = int(np.logical_and(a, b).sum())
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        raise BothEmpty("IoU undefined: both masks are empty")
    return inter / union


# ---------------------------------------------------------------------------
# run-length encoding (COCO-compatible: column-major, starts with a zero run)


def rle_encode(mask: np.ndarray) -> dict:
    flat = np.ascontiguousarray(mask, dtype=bool).ravel(order="F")
    counts = []
    run_value = False
    run_length = 0
    for bit in flat:
        if bit == run_value:
            run_length += 1
        else:
            counts.append(run_length)
            run_value = bit
            run_length = 1
    counts.append(run_length)
    return {"size": [int(mask.shape[0]), int(mask.shape[1])], "counts": counts}


def rle_decode(rle: dict) -> np.ndarray:
    try:
        h, w = int(rle["size"][0]), int(rle["size"][1])
        counts = [int(c) for c in rle["counts"]]
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed RLE object: {rle!r}") from exc
    if any(c < 0 for c in counts) or sum(counts) != h * w:
        raise SchemaError(
            f"RLE counts sum to {sum(counts)}, expected {h}*{w}={h * w}"
        )
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for c in counts:
        if value:
            flat[pos : pos + c] = True
        pos += c
        value = not value
    return flat.reshape((h, w), order="F")


def polygons_to_mask(polygons, height: int, width: int) -> np.ndarray:
    """Rasterize COCO polygon lists ([x1,y1,x2,y2,...] each) to one mask.

    Filling follows PIL's polygon semantics (boundary pixels included);
    multiple polygons are unioned.
    """
    im = Image.new("L", (width, height), 0)
    draw = ImageDraw.Draw(im)
    for poly in polygons:
        if len(poly) < 6 or len(poly) % 2 != 0:
            raise SchemaError(f"polygon needs >= 3 (x, y) points, got {poly!r}")
        draw.polygon(list(zip(poly[0::2], poly[1::2])), fill=1)
    return np.asarray(im, dtype=bool)


# ---------------------------------------------------------------------------
# matching and average precision


def _ranked_order(dets) -> list[int]:
    # descending score; ties keep insertion order
    return sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))


def _cell_iou_matrix(cell_gt, cell_det) -> np.ndarray:
    ious = np.zeros((len(cell_det), len(cell_gt)))
    for d, det in enumerate(cell_det):
        for g, gt in enumerate(cell_gt):
            ious[d, g] = mask_iou(det.mask, gt.mask)
    return ious


def _greedy_match_cell(ious: np.ndarray, det_order, threshold: float):
    """COCO greedy matching inside one (image, category) cell.

    det_order iterates detections by descending score; each takes the
    unmatched ground truth with the highest IoU >= threshold (IoU ties go
    to the earlier ground-truth record).
    """
    matched_gt: set[int] = set()
    flags = [False] * ious.shape[0]
    for d in det_order:
        best_g = -1
        best_iou = threshold
        for g in range(ious.shape[1]):
            if g in matched_gt:
                continue
            if ious[d, g] > best_iou or (best_g == -1 and ious[d, g] >= threshold):
                best_g = g
                best_iou = ious[d, g]
        if best_g >= 0:
            matched_gt.add(best_g)
            flags[d] = True
    return flags


def _ap_101(flags_in_rank_order, n_positive: int) -> float:
    """101-point interpolated AP from ranked hit/miss flags.

    Plain-Python arithmetic on purpose: the acceptance oracle reproduces
    this bit-for-bit.
    """
    if n_positive == 0:
        return 0.0
    precisions = []
    recalls = []
    tp = 0
    fp = 0
    for hit in flags_in_rank_order:
        if hit:
            tp += 1
        else:
            fp += 1
        precisions.append(tp / (tp + fp))
        recalls.append(tp / n_positive)
    interpolated = []
    for k in range(RECALL_POINTS):
        r = k / (RECALL_POINTS - 1)
        best = 0.0
        for prec, rec in zip(precisions, recalls):
            if rec >= r and prec > best:
                best = prec
        interpolated.append(best)
    return sum(interpolated) / RECALL_POINTS


def _group_cells(gt, det):
    cells: dict[tuple, tuple[list, list]] = {}
    for g in gt:
        cells.setdefault((g.image_id, g.category_id), ([], []))[0].append(g)
    for i, d in enumerate(det):
        cells.setdefault((d.image_id, d.category_id), ([], []))[1].append((i, d))
    return cells


def match_and_ap(gt, det, iou_threshold: float) -> dict:
    """Greedy-match detections to ground truth and compute 101-point AP.

    Returns {"ap", "tp", "fp", "fn"} counted at the given threshold. The
    PR curve ranks all detections together by score; matching itself is
    confined to each (image, category) cell.
    """
    gt = list(gt)
    det = list(det)
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must be in (0, 1), got {iou_threshold}")
    flags_by_det = [False] * len(det)
    for (_, _), (cell_gt, cell_pairs) in _group_cells(gt, det).items():
        if not cell_pairs:
            continue
        det_indices = [i for i, _ in cell_pairs]
        cell_det = [d for _, d in cell_pairs]
        ious = _cell_iou_matrix(cell_gt, cell_det) if cell_gt else np.zeros((len(cell_det), 0))
        local_order = _ranked_order(cell_det)
        local_flags = _greedy_match_cell(ious, local_order, iou_threshold)
        for local_i, flag in enumerate(local_flags):
            flags_by_det[det_indices[local_i]] = flag
    order = _ranked_order(det)
    ranked_flags = [flags_by_det[i] for i in order]
    tp = sum(ranked_flags)
    return {
        "ap": _ap_101(ranked_flags, len(gt)),
        "tp": tp,
        "fp": len(det) - tp,
        "fn": len(gt) - tp,
    }


def evaluate(gt, det) -> EvalSummary:
    """Full COCO-style summary over all categories present in the ground truth.

    Detections for categories with no ground truth are ignored (no AP is
    defined for them); within a category all images contribute to one
    ranked PR curve.
    """
    gt = list(gt)
    det = list(det)
    if not gt:
        raise EmptyGroundTruth("evaluation requires at least one ground-truth instance")
    categories = sorted({g.category_id for g in gt})

    ap_by_cat_thr = {}
    for cat in categories:
        gt_c = [g for g in gt if g.category_id == cat]
        det_c = [d for d in det if d.category_id == cat]
        for thr in IOU_THRESHOLDS:
            ap_by_cat_thr[(cat, thr)] = match_and_ap(gt_c, det_c, thr)["ap"]

    def mean_over_cats(thr):
        return sum(ap_by_cat_thr[(cat, thr)] for cat in categories) / len(categories)

    segm_map = sum(mean_over_cats(thr) for thr in IOU_THRESHOLDS) / len(IOU_THRESHOLDS)
    ap50 = mean_over_cats(0.50)
    ap75 = mean_over_cats(0.75)

    precisions = []
    recalls = []
    per_class_tp = {}
    for cat in categories:
        gt_c = [g for g in gt if g.category_id == cat]
        det_c = [d for d in det if d.category_id == cat and d.score >= OPERATING_SCORE]
        counts = match_and_ap(gt_c, det_c, OPERATING_IOU)
        per_class_tp[cat] = counts["tp"]
        n_det = counts["tp"] + counts["fp"]
        precisions.append(counts["tp"] / n_det if n_det else 0.0)
        recalls.append(counts["tp"] / len(gt_c))

    return EvalSummary(
        segm_map=segm_map,
        ap50=ap50,
        ap75=ap75,
        avg_precision=sum(precisions) / len(precisions),
        avg_recall=sum(recalls) / len(recalls),
        per_class_tp=per_class_tp,
    )


def percent_change(baseline: float, value: float) -> float:
    """100 * (value - baseline) / baseline, rounded to two decimals."""
    if baseline <= 0:
        raise ZeroBaseline(f"baseline must be > 0, got {baseline}")
    return round(100.0 * (value - baseline) / baseline, 2)


def metric_correlation(points) -> float:
    """Pearson correlation of (segm_mAP, PSNR) points."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise DegenerateVariance(f"need >= 2 points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    denom = math.sqrt(float(np.sum(dx * dx)) * float(np.sum(dy * dy)))
    if denom == 0.0:
        raise DegenerateVariance("zero variance in at least one coordinate")
    return float(np.sum(dx * dy)) / denom


# ---------------------------------------------------------------------------
# COCO-subset file I/O


def load_coco_ground_truth(path):
    """Load a COCO-subset ground-truth JSON.

    Returns (records, images, categories) where images maps id ->
    {"height", "width", "file_name"} and categories maps id -> name.
    Annotation segmentations may be polygon lists or uncompressed RLE.
    """
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc}") from exc
    try:
        images = {
            im["id"]: {
                "height": int(im["height"]),
                "width": int(im["width"]),
                "file_name": im.get("file_name", ""),
            }
            for im in doc["images"]
        }
        categories = {c["id"]: c.get("name", str(c["id"])) for c in doc["categories"]}
        raw_annotations = doc["annotations"]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{p}: missing required COCO section: {exc}") from exc

    records = []
    for ann in raw_annotations:
        try:
            image_id = ann["image_id"]
            category_id = ann["category_id"]
            seg = ann["segmentation"]
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{p}: malformed annotation {ann!r}") from exc
        if image_id not in images:
            raise SchemaError(f"{p}: annotation references unknown image {image_id}")
        if category_id not in categories:
            raise SchemaError(f"{p}: annotation references unknown category {category_id}")
        shape = images[image_id]
        mask = _segmentation_to_mask(seg, shape["height"], shape["width"], p)
        records.append(InstanceRecord(image_id=image_id, category_id=category_id, mask=mask))
    return records, images, categories


def _segmentation_to_mask(seg, height, width, origin):
    if isinstance(seg, dict):
        mask = rle_decode(seg)
        if mask.shape != (height, width):
            raise GridMismatch(
                f"{origin}: RLE grid {mask.shape} does not match image {(height, width)}"
            )
        return mask
    if isinstance(seg, list):
        return polygons_to_mask(seg, height, width)
    raise SchemaError(f"{origin}: segmentation must be polygons or RLE, got {type(seg)}")


def load_coco_detections(path, images) -> list[Detection]:
    """Load a COCO results-style JSON array of RLE detections."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{p}: not valid JSON: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError(f"{p}: detections file must be a JSON array")
    detections = []
    for entry in doc:
        try:
            image_id = entry["image_id"]
            category_id = entry["category_id"]
            seg = entry["segmentation"]
            score = float(entry["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{p}: malformed detection {entry!r}") from exc
        if image_id not in images:
            raise SchemaError(f"{p}: detection references unknown image {image_id}")
        shape = images[image_id]
        mask = _segmentation_to_mask(seg, shape["height"], shape["width"], p)
        detections.append(
            Detection(image_id=image_id, category_id=category_id, mask=mask, score=score)
        )
    return detections


def write_summary_json(summary: EvalSummary, path) -> None:
    Path(path).write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_summary_csv(summary: EvalSummary, path) -> None:
    """Single CSV row mirroring the reference tables' metric columns."""
    with open(Path(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segm_mAP", "segm_mAP_50", "segm_mAP_75", "avg_precision", "avg_recall"])
        writer.writerow(
            [summary.segm_map, summary.ap50, summary.ap75, summary.avg_precision, summary.avg_recall]
        )
