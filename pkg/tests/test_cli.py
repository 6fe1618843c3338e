import json
import math

import numpy as np
import pytest
from conftest import coco_det_doc, coco_gt_doc, rect_mask, write_json, write_png
from oracles import oracle_evaluate

from sreval.cli import main
from sreval.image_io import load_image
from sreval.synthetic import checkerboard, gaussian_blur

CP = "cp {input} {output}"


def plane_png(tmp_path, name, gen, size=16):
    return write_png(tmp_path / name, gen.integers(0, 256, (size, size)))


# ---------------------------------------------------------------------------
# parser-level behavior


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("sreval ")


def test_no_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_resize_scale_and_size_are_exclusive(tmp_path, rng):
    src = plane_png(tmp_path, "a.png", rng)
    with pytest.raises(SystemExit) as exc:
        main(["resize", str(src), "--scale", "2", "--size", "4x4", "--out", "b.png"])
    assert exc.value.code == 2


def test_domain_errors_exit_one_with_class_name(tmp_path, rng, capsys):
    assert main(["metrics", "no_such.png", "also_missing.png"]) == 1
    assert capsys.readouterr().err.startswith("error: FileNotFoundError")

    src = plane_png(tmp_path, "a.png", rng)
    assert main(["degrade", str(src), "--factor", "0",
                 "--out", str(tmp_path / "x.png")]) == 1
    assert capsys.readouterr().err.startswith("error: ValueError")

    bad = tmp_path / "bad.json"
    bad.write_text("{ nope", encoding="utf-8")
    assert main(["segeval", "--gt", str(bad), "--det", str(bad),
                 "--out", str(tmp_path / "s.json")]) == 1
    assert capsys.readouterr().err.startswith("error: SchemaError")


# ---------------------------------------------------------------------------
# image commands


def test_degrade_writes_same_size_image(tmp_path, rng, capsys):
    src = plane_png(tmp_path, "src.png", rng)
    out = tmp_path / "deg.png"
    assert main(["degrade", str(src), "--factor", "2", "--out", str(out)]) == 0
    assert "wrote" in capsys.readouterr().out
    img = load_image(out)
    assert (img.width, img.height) == (16, 16)


def test_degrade_factor_one_is_identity(tmp_path, rng):
    src = plane_png(tmp_path, "src.png", rng)
    out = tmp_path / "same.png"
    assert main(["degrade", str(src), "--factor", "1", "--out", str(out)]) == 0
    assert np.array_equal(load_image(out).samples, load_image(src).samples)


def test_resize_by_scale_and_by_size(tmp_path, rng):
    src = plane_png(tmp_path, "src.png", rng)
    half = tmp_path / "half.png"
    assert main(["resize", str(src), "--scale", "0.5", "--out", str(half)]) == 0
    assert (load_image(half).width, load_image(half).height) == (8, 8)
    odd = tmp_path / "odd.png"
    assert main(["resize", str(src), "--size", "7x5", "--kernel", "lanczos2",
                 "--out", str(odd)]) == 0
    assert (load_image(odd).width, load_image(odd).height) == (7, 5)


def test_metrics_identical_pair(tmp_path, rng, capsys):
    src = plane_png(tmp_path, "a.png", rng)
    out = tmp_path / "scores.json"
    assert main(["metrics", str(src), str(src), "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "psnr=inf" in stdout
    assert "ssim=1.000000" in stdout
    doc = json.loads(out.read_text())
    assert doc["psnr"] == "inf"
    assert doc["ssim"] == 1.0
    assert doc["lpips"] is None


def test_metrics_lpips_sidecar(tmp_path, rng, capsys):
    a = plane_png(tmp_path, "hq.png", rng)
    b = plane_png(tmp_path, "lq.png", rng)
    sidecar = tmp_path / "lpips.csv"
    sidecar.write_text("image_id,lpips\nlq,0.42\n", encoding="utf-8")
    assert main(["metrics", str(a), str(b), "--lpips", str(sidecar)]) == 0
    captured = capsys.readouterr()
    assert "lpips=0.420000" in captured.out

    assert main(["metrics", str(a), str(b), "--lpips", str(sidecar),
                 "--image-id", "ghost"]) == 0
    captured = capsys.readouterr()
    assert "lpips" not in captured.out
    assert "no lpips entry" in captured.err


def test_ringspec_csv_and_shares(tmp_path, capsys):
    write_png(tmp_path / "sharp.png", checkerboard(16, cell=2).samples)
    write_png(tmp_path / "soft.png", gaussian_blur(checkerboard(16, cell=2), 2.0).samples)
    out = tmp_path / "rings.csv"
    assert main(["ringspec", str(tmp_path / "sharp.png"), str(tmp_path / "soft.png"),
                 "--rings", "8", "--cutoff", "4", "--out", str(out),
                 "--svg", str(tmp_path / "rings.svg")]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "label,ring_index,r_min,r_max,energy"
    assert len(lines) == 1 + 2 * 8
    stdout = capsys.readouterr().out
    assert "sharp: high-frequency share" in stdout
    assert "soft: high-frequency share" in stdout
    assert (tmp_path / "rings.svg").read_text().startswith("<svg")


def test_focus_calibrate_then_classify(tmp_path, capsys):
    sharp_dir = tmp_path / "sharp"
    blurry_dir = tmp_path / "blurry"
    sharp_dir.mkdir()
    blurry_dir.mkdir()
    for k, cell in enumerate((2, 4, 8)):
        board = checkerboard(32, cell=cell)
        write_png(sharp_dir / f"s{k}.png", board.samples)
        write_png(blurry_dir / f"b{k}.png", gaussian_blur(board, 2.5).samples)
    model_path = tmp_path / "model.txt"
    assert main(["calibrate-focus", "--sharp", str(sharp_dir),
                 "--blurry", str(blurry_dir), "--out", str(model_path)]) == 0
    assert "balanced accuracy 1.0000" in capsys.readouterr().out

    labels_csv = tmp_path / "labels.csv"
    assert main(["classify", str(sharp_dir / "s0.png"), str(blurry_dir / "b0.png"),
                 "--model", str(model_path), "--out", str(labels_csv)]) == 0
    stdout = capsys.readouterr().out
    assert "s0.png: sharp" in stdout
    assert "b0.png: blurry" in stdout
    lines = labels_csv.read_text().strip().splitlines()
    assert lines[0] == "image,label"
    assert lines[1:] == ["s0.png,sharp", "b0.png,blurry"]


# ---------------------------------------------------------------------------
# evaluation commands


def test_segeval_matches_oracle(tmp_path, capsys):
    g1 = rect_mask(8, 8, 0, 0, 4, 4)
    g2 = rect_mask(8, 8, 4, 4, 3, 3)
    d1 = rect_mask(8, 8, 0, 1, 4, 4)
    gt_raw = [(0, 1, g1), (0, 2, g2)]
    det_raw = [(0, 1, d1, 0.9), (0, 2, g2, 0.8)]
    gt = write_json(tmp_path / "gt.json", coco_gt_doc({0: (8, 8)}, gt_raw))
    det = write_json(tmp_path / "det.json", coco_det_doc(det_raw))
    out = tmp_path / "summary.json"
    csv_out = tmp_path / "summary.csv"
    assert main(["segeval", "--gt", str(gt), "--det", str(det),
                 "--out", str(out), "--csv", str(csv_out)]) == 0
    want = oracle_evaluate(
        [(i, c, m.tolist()) for i, c, m in gt_raw],
        [(i, c, m.tolist(), s) for i, c, m, s in det_raw],
    )
    doc = json.loads(out.read_text())
    assert doc["segm_mAP"] == want["segm_mAP"]
    assert doc["segm_mAP_50"] == want["segm_mAP_50"]
    assert doc["segm_mAP_75"] == want["segm_mAP_75"]
    assert doc["avg_precision"] == want["avg_precision"]
    assert doc["avg_recall"] == want["avg_recall"]
    assert doc["per_class_tp"] == {str(k): v for k, v in want["per_class_tp"].items()}
    assert csv_out.read_text().splitlines()[0] == (
        "segm_mAP,segm_mAP_50,segm_mAP_75,avg_precision,avg_recall"
    )
    assert "segm_mAP=" in capsys.readouterr().out


def manifest_fixture(tmp_path, n=4):
    gen = np.random.default_rng(11)
    entries = []
    for k in range(n):
        base = gen.integers(0, 256, (12, 12))
        write_png(tmp_path / f"h{k}.png", base)
        write_png(tmp_path / f"l{k}.png",
                  np.clip(base + gen.integers(-1 - k, 2 + k, (12, 12)), 0, 255))
        entries.append({"id": f"p{k}", "hq": f"h{k}.png", "lq": f"l{k}.png"})
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"name": "cli", "pairs": entries}), encoding="utf-8")
    return path


def test_validate_manifest_report_and_save(tmp_path, capsys):
    mpath = manifest_fixture(tmp_path)
    out = tmp_path / "report.json"
    saved = tmp_path / "cached.json"
    assert main(["validate-manifest", "--manifest", str(mpath),
                 "--out", str(out), "--save", str(saved)]) == 0
    stdout = capsys.readouterr().out
    assert "4 pairs" in stdout
    doc = json.loads(out.read_text())
    assert [r["pair_id"] for r in doc] == ["p0", "p1", "p2", "p3"]
    assert all(r["flag"] in ("ok", "duplicate", "mispaired") for r in doc)
    cached = json.loads(saved.read_text())
    assert set(cached["psnr"]) == {"p0", "p1", "p2", "p3"}


def test_split_spectrum_auto_validates(tmp_path, capsys):
    mpath = manifest_fixture(tmp_path, n=6)
    out = tmp_path / "labeled.json"
    csv_out = tmp_path / "split.csv"
    assert main(["split-spectrum", "--manifest", str(mpath),
                 "--out", str(out), "--csv", str(csv_out)]) == 0
    stdout = capsys.readouterr().out
    assert "computing psnr for 6 uncached pairs" in stdout
    assert "wide:" in stdout
    doc = json.loads(out.read_text())
    assert set(doc["band_labels"]) == {f"p{k}" for k in range(6)}
    assert all(labels[-1] == "wide" for labels in doc["band_labels"].values())
    assert len(doc["bands"]) == 3
    lines = csv_out.read_text().strip().splitlines()
    assert lines[0] == "band,psnr_low,psnr_high,count"
    assert lines[3].startswith("wide,") and lines[3].endswith(",6")


def test_split_spectrum_custom_bands(tmp_path):
    mpath = manifest_fixture(tmp_path, n=5)
    out = tmp_path / "labeled.json"
    assert main(["split-spectrum", "--manifest", str(mpath),
                 "--bands", "narrow=45:55,middle=30:70,wide=0:100",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    narrow = next(b for b in doc["bands"] if b["band"] == "narrow")
    middle = next(b for b in doc["bands"] if b["band"] == "middle")
    assert middle["psnr_low"] <= narrow["psnr_low"]


def test_pipeline_command_end_to_end(tmp_path, capsys):
    mpath = manifest_fixture(tmp_path, n=2)
    m1 = rect_mask(8, 8, 0, 0, 3, 3)
    gt = write_json(tmp_path / "gt.json", coco_gt_doc({0: (8, 8)}, [(0, 1, m1)]))
    det = write_json(tmp_path / "det.json", coco_det_doc([(0, 1, m1, 0.9)]))
    job = write_json(tmp_path / "job.json", {
        "sr_command": CP,
        "sr_scale": 1,
        "manifest": "m.json",
        "gt": "gt.json",
        "detections": {"only": "det.json"},
    })
    out_dir = tmp_path / "run"
    assert main(["pipeline", "--config", str(job), "--out-dir", str(out_dir),
                 "--workers", "2"]) == 0
    stdout = capsys.readouterr().out
    assert "2 images, 2 routed to SR, 0 failed" in stdout
    report = json.loads((out_dir / "report.json").read_text())
    assert report["canonical"]["baseline"] == "only"
    assert len(report["canonical"]["records"]) == 2
    lines = (out_dir / "variants.csv").read_text().strip().splitlines()
    assert lines[0] == (
        "variant,segm_mAP_50,segm_mAP_75,"
        "segm_mAP_50_percent_change,segm_mAP_75_percent_change"
    )
    assert lines[1].startswith("only,1.0,1.0,0.00,0.00")


def test_ordering_command(tmp_path, rng, capsys):
    hq = plane_png(tmp_path, "hq.png", rng, size=16)
    lq = plane_png(tmp_path, "lq.png", rng, size=16)
    out = tmp_path / "ordering.csv"
    assert main(["ordering", "--hq", str(hq), "--lq", str(lq),
                 "--sr-command", CP, "--factor", "2",
                 "--out", str(out), "--out-dir", str(tmp_path / "work")]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "image_id,branch,psnr,ssim"
    assert len(lines) == 3
    branches = {ln.split(",")[1] for ln in lines[1:]}
    assert branches == {"sr-first", "subsample-first"}
    stdout = capsys.readouterr().out
    assert "sr-first: mean psnr" in stdout
    assert "subsample-first: mean psnr" in stdout


def test_report_command_reproduces_percent_table(tmp_path, capsys):
    aggregates = {
        "baseline": {"segm_mAP_50": 0.226, "segm_mAP_75": 0.156},
        "restored": {"segm_mAP_50": 0.279, "segm_mAP_75": 0.195},
    }
    agg = write_json(tmp_path / "agg.json", aggregates)
    out = tmp_path / "table.csv"
    assert main(["report", "--aggregates", str(agg), "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == (
        "variant,segm_mAP_50,segm_mAP_75,"
        "segm_mAP_50_percent_change,segm_mAP_75_percent_change"
    )
    assert lines[1] == "baseline,0.226,0.156,0.00,0.00"
    assert lines[2] == "restored,0.279,0.195,23.45,25.00"
    assert "baseline baseline" in capsys.readouterr().out


def test_report_command_accepts_variants_wrapper_and_baseline_flag(tmp_path):
    doc = {"variants": {
        "a": {"segm_mAP_50": 0.156, "segm_mAP_75": 0.1},
        "b": {"segm_mAP_50": 0.255, "segm_mAP_75": 0.2},
    }}
    agg = write_json(tmp_path / "agg.json", doc)
    out = tmp_path / "t.csv"
    assert main(["report", "--aggregates", str(agg), "--baseline", "a",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[2].split(",")[3] == "63.46"


def test_report_command_unknown_baseline(tmp_path, capsys):
    agg = write_json(tmp_path / "agg.json",
                     {"a": {"segm_mAP_50": 0.1, "segm_mAP_75": 0.1}})
    assert main(["report", "--aggregates", str(agg), "--baseline", "zz",
                 "--out", str(tmp_path / "t.csv")]) == 1
    assert capsys.readouterr().err.startswith("error: SrevalError")
