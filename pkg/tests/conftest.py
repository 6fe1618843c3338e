import json

import numpy as np
import pytest

from sreval.image_io import RasterImage, save_image
from sreval.segeval import rle_encode


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def write_png(path, array):
    """uint8 (h, w) or (h, w, 3) array -> PNG on disk; returns the path."""
    save_image(RasterImage(np.asarray(array, dtype=np.uint8)), path)
    return path


def rect_mask(h, w, top, left, height, width):
    m = np.zeros((h, w), dtype=bool)
    m[top : top + height, left : left + width] = True
    return m


def random_micro_case(seed):
    """One micro scenario: <=4 GT, <=6 detections, 8x8 grids, 2 categories."""
    gen = np.random.default_rng(seed)
    images = [0, 1]
    cats = [1, 2]
    gt, det = [], []
    for _ in range(int(gen.integers(1, 5))):
        h, w = int(gen.integers(2, 7)), int(gen.integers(2, 7))
        top, left = int(gen.integers(0, 8 - h)), int(gen.integers(0, 8 - w))
        gt.append(
            (int(gen.choice(images)), int(gen.choice(cats)), rect_mask(8, 8, top, left, h, w))
        )
    for _ in range(int(gen.integers(0, 7))):
        h, w = int(gen.integers(2, 7)), int(gen.integers(2, 7))
        top, left = int(gen.integers(0, 8 - h)), int(gen.integers(0, 8 - w))
        # quantized scores produce occasional ties, exercising the tie rule
        score = round(float(gen.uniform(0.05, 1.0)), 1)
        det.append(
            (int(gen.choice(images)), int(gen.choice(cats)),
             rect_mask(8, 8, top, left, h, w), score)
        )
    return gt, det


def coco_gt_doc(image_shapes, annotations):
    """image_shapes: {image_id: (h, w)}; annotations: (image_id, cat, mask)."""
    cats = sorted({c for _, c, _ in annotations}) or [1]
    return {
        "images": [
            {"id": i, "height": h, "width": w, "file_name": f"{i}.png"}
            for i, (h, w) in image_shapes.items()
        ],
        "categories": [{"id": c, "name": f"cat{c}"} for c in cats],
        "annotations": [
            {"id": k + 1, "image_id": i, "category_id": c, "segmentation": rle_encode(m)}
            for k, (i, c, m) in enumerate(annotations)
        ],
    }


def coco_det_doc(detections):
    """detections: (image_id, cat, mask, score) tuples."""
    return [
        {"image_id": i, "category_id": c, "segmentation": rle_encode(m), "score": s}
        for i, c, m, s in detections
    ]


def write_json(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path
