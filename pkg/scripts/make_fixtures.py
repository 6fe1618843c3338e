"""Generate the bundled fixture tree used by the CLI examples and demos.

Everything is derived from one seed, so regenerating with the same seed
reproduces the tree byte for byte.
"""
import argparse
import json
from pathlib import Path

import numpy as np

from sreval.image_io import plane_to_image, save_image
from sreval.resample import KernelKind, degrade
from sreval.segeval import rle_encode
from sreval.synthetic import checkerboard, dedicated_pair, detailed_plane, gaussian_blur, noise_plane


def rect(h, w, top, left, hh, ww):
    m = np.zeros((h, w), dtype=bool)
    m[top : top + hh, left : left + ww] = True
    return m


def write_plane(plane, path):
    path.parent.mkdir(parents=True, exist_ok=True)
    save_image(plane_to_image(plane), path)


def make_images(root, rng):
    for k in range(5):
        write_plane(detailed_plane(rng, 256), root / "images" / f"detail{k}.png")
    board = checkerboard(32)
    write_plane(board, root / "images" / "checker.png")
    for sigma in (1, 2, 3):
        write_plane(gaussian_blur(board, float(sigma)),
                    root / "images" / f"checker_blur{sigma}.png")


def make_pairs(root, rng):
    entries = []
    for k in range(4):
        hq = detailed_plane(rng, 64)
        lq = degrade(hq, 2, KernelKind.BICUBIC)
        write_plane(hq, root / "pairs" / f"bic{k}_hq.png")
        write_plane(lq, root / "pairs" / f"bic{k}_lq.png")
        entries.append({"id": f"bic{k}", "hq": f"bic{k}_hq.png", "lq": f"bic{k}_lq.png"})
    for k in range(4):
        hq, lq = dedicated_pair(rng, 64)
        write_plane(hq, root / "pairs" / f"ded{k}_hq.png")
        write_plane(lq, root / "pairs" / f"ded{k}_lq.png")
        entries.append({"id": f"ded{k}", "hq": f"ded{k}_hq.png", "lq": f"ded{k}_lq.png"})
    manifest = {"name": "fixture-pairs", "pairs": entries}
    (root / "pairs" / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    lpips = ["image_id,lpips"] + [f"{e['id']},{rng.uniform(0.05, 0.6):.4f}" for e in entries]
    (root / "pairs" / "lpips.csv").write_text("\n".join(lpips) + "\n", encoding="utf-8")


def make_focus_sets(root, rng):
    for k in range(6):
        plane = noise_plane(rng, 64, 64)
        write_plane(plane, root / "focus" / "sharp" / f"s{k}.png")
        write_plane(gaussian_blur(plane, 3.0), root / "focus" / "blurry" / f"b{k}.png")


def make_seg_fixture(root):
    """Tiny two-image, two-category segmentation ground truth plus results."""
    g1 = rect(8, 8, 0, 0, 4, 4)
    g2 = rect(8, 8, 4, 4, 3, 3)
    g3 = rect(8, 8, 1, 3, 3, 4)
    gt = {
        "images": [
            {"id": 0, "height": 8, "width": 8, "file_name": "0.png"},
            {"id": 1, "height": 8, "width": 8, "file_name": "1.png"},
        ],
        "categories": [{"id": 1, "name": "cell"}, {"id": 2, "name": "cluster"}],
        "annotations": [
            {"id": 1, "image_id": 0, "category_id": 1, "segmentation": rle_encode(g1)},
            {"id": 2, "image_id": 0, "category_id": 2, "segmentation": rle_encode(g2)},
            {"id": 3, "image_id": 1, "category_id": 1, "segmentation": rle_encode(g3)},
        ],
    }
    perfect = [
        {"image_id": 0, "category_id": 1, "segmentation": rle_encode(g1), "score": 0.95},
        {"image_id": 0, "category_id": 2, "segmentation": rle_encode(g2), "score": 0.9},
        {"image_id": 1, "category_id": 1, "segmentation": rle_encode(g3), "score": 0.85},
    ]
    partial = [
        {"image_id": 0, "category_id": 1, "segmentation": rle_encode(rect(8, 8, 0, 1, 4, 4)),
         "score": 0.8},
        {"image_id": 1, "category_id": 1, "segmentation": rle_encode(rect(8, 8, 5, 5, 2, 2)),
         "score": 0.7},
    ]
    seg = root / "seg"
    seg.mkdir(parents=True, exist_ok=True)
    (seg / "gt.json").write_text(json.dumps(gt, indent=2) + "\n", encoding="utf-8")
    (seg / "det_perfect.json").write_text(json.dumps(perfect, indent=2) + "\n", encoding="utf-8")
    (seg / "det_partial.json").write_text(json.dumps(partial, indent=2) + "\n", encoding="utf-8")


def make_job(root):
    job = {
        "sr_command": "cp {input} {output}",
        "sr_scale": 1,
        "manifest": "pairs/manifest.json",
        "gt": "seg/gt.json",
        "detections": {
            "perfect": "seg/det_perfect.json",
            "partial": "seg/det_partial.json",
        },
        "baseline": "perfect",
    }
    (root / "job.json").write_text(json.dumps(job, indent=2) + "\n", encoding="utf-8")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="fixtures")
    args = parser.parse_args(argv)

    root = Path(args.out_dir)
    rng = np.random.default_rng(args.seed)
    make_images(root, rng)
    make_pairs(root, rng)
    make_focus_sets(root, rng)
    make_seg_fixture(root)
    make_job(root)
    n = sum(1 for _ in root.rglob("*") if _.is_file())
    print(f"wrote {n} fixture files under {root} (seed {args.seed})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
