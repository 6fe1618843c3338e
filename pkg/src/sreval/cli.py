"""Command-line front end.

One executable, one subcommand per capability. Exit codes: 0 on success,
1 on a domain error (the error class name goes to stderr), 2 on a usage
error (argparse). Human-readable summaries go to stdout; machine output
is written only to the paths given via --out and friends.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .errors import SrevalError
from .focus import calibrate, classify, load_focus_model, save_focus_model
from .image_io import load_image, save_image, to_luma
from .manifest import (
    DEFAULT_BANDS,
    MISPAIR_FLOOR_DB,
    load_manifest,
    save_manifest,
    spectrum_split,
    validate_pairs,
    write_split_csv,
)
from .metrics import compare_pair, load_lpips_sidecar
from .pipeline import (
    PipelineConfig,
    load_job,
    ordering_experiment,
    run_pipeline,
)
from .resample import KernelKind, degrade, resize
from .ringspec import (
    DEFAULT_RING_COUNT,
    compute_ring_spectrum,
    emit_ring_bars,
    high_frequency_share,
)
from .segeval import (
    evaluate,
    load_coco_detections,
    load_coco_ground_truth,
    percent_change,
    write_summary_csv,
    write_summary_json,
)

KERNEL_NAMES = {k.name.lower(): k for k in KernelKind}


def _kernel(name: str) -> KernelKind:
    return KERNEL_NAMES[name]


def _expand_images(paths) -> list[Path]:
    """Accept files and directories; directories expand to sorted *.png."""
    out: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(p.glob("*.png"))
            if not found:
                raise FileNotFoundError(f"no .png files in directory {p}")
            out.extend(found)
        else:
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_degrade(args) -> int:
    img = load_image(args.image)
    out = degrade(img, args.factor, _kernel(args.kernel))
    save_image(out, args.out)
    print(f"wrote {args.out} (factor {args.factor}, kernel {args.kernel})")
    return 0


def _cmd_resize(args) -> int:
    img = load_image(args.image)
    if args.size is not None:
        w, h = args.size
    else:
        w = max(1, round(img.width * args.scale))
        h = max(1, round(img.height * args.scale))
    out = resize(img, w, h, _kernel(args.kernel))
    save_image(out, args.out)
    print(f"wrote {args.out} ({img.width}x{img.height} -> {w}x{h}, kernel {args.kernel})")
    return 0


def _cmd_metrics(args) -> int:
    hq = load_image(args.hq)
    lq = load_image(args.lq)
    lpips = None
    if args.lpips is not None:
        sidecar = load_lpips_sidecar(args.lpips)
        image_id = args.image_id or Path(args.lq).stem
        lpips = sidecar.get(image_id)
        if lpips is None:
            print(f"note: no lpips entry for {image_id!r} in {args.lpips}", file=sys.stderr)
    scores = compare_pair(hq, lq, lpips=lpips)
    psnr_text = "inf" if math.isinf(scores.psnr) else f"{scores.psnr:.4f}"
    line = f"psnr={psnr_text} dB  ssim={scores.ssim:.6f}"
    if scores.lpips is not None:
        line += f"  lpips={scores.lpips:.6f}"
    print(line)
    if args.out is not None:
        doc = {
            "psnr": "inf" if math.isinf(scores.psnr) else scores.psnr,
            "ssim": scores.ssim,
            "lpips": scores.lpips,
        }
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return 0


def _cmd_ringspec(args) -> int:
    spectra = []
    for p in _expand_images(args.images):
        plane = to_luma(load_image(p))
        spectra.append((p.stem, compute_ring_spectrum(plane, args.rings)))
    emit_ring_bars(spectra, args.out, svg_path=args.svg)
    print(f"wrote {args.out} ({len(spectra)} spectra x {args.rings} rings)")
    if args.cutoff is not None:
        for label, spec in spectra:
            share = high_frequency_share(spec, args.cutoff)
            print(f"{label}: high-frequency share (rings >= {args.cutoff}) = {share:.6f}")
    return 0


def _cmd_calibrate_focus(args) -> int:
    sharp = [to_luma(load_image(p)) for p in _expand_images(args.sharp)]
    blurry = [to_luma(load_image(p)) for p in _expand_images(args.blurry)]
    cutoff = args.cutoff if args.cutoff is not None else args.rings // 2
    model = calibrate(sharp, blurry, ring_count=args.rings, cutoff_ring=cutoff)
    save_focus_model(model, args.out)
    print(
        f"wrote {args.out} (threshold {model.threshold:.6g}, "
        f"balanced accuracy {model.balanced_accuracy:.4f}, "
        f"{model.n_sharp} sharp / {model.n_blurry} blurry)"
    )
    return 0


def _cmd_classify(args) -> int:
    model = load_focus_model(args.model)
    rows = []
    for p in _expand_images(args.images):
        label = classify(to_luma(load_image(p)), model)
        rows.append((p.name, label.value))
        print(f"{p.name}: {label.value}")
    if args.out is not None:
        lines = ["image,label"] + [f"{name},{label}" for name, label in rows]
        Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_segeval(args) -> int:
    gt, images, _ = load_coco_ground_truth(args.gt)
    det = load_coco_detections(args.det, images)
    summary = evaluate(gt, det)
    write_summary_json(summary, args.out)
    if args.csv is not None:
        write_summary_csv(summary, args.csv)
    print(
        f"segm_mAP={summary.segm_map:.4f} ap50={summary.ap50:.4f} "
        f"ap75={summary.ap75:.4f} avg_precision={summary.avg_precision:.4f} "
        f"avg_recall={summary.avg_recall:.4f}"
    )
    return 0


def _parse_bands(text: str) -> dict:
    # e.g. "narrow=40:60,middle=25:75,wide=0:100"
    bands = {}
    for part in text.split(","):
        name, _, rng = part.partition("=")
        lo, _, hi = rng.partition(":")
        try:
            bands[name.strip()] = (float(lo), float(hi))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad band spec {part!r}") from exc
    return bands


def _cmd_split_spectrum(args) -> int:
    manifest = load_manifest(args.manifest)
    missing = [q.pair_id for q in manifest.pairs if q.pair_id not in manifest.psnr_cache]
    if missing:
        print(f"computing psnr for {len(missing)} uncached pairs")
        validate_pairs(manifest)
    bands = args.bands if args.bands is not None else DEFAULT_BANDS
    spectrum_split(manifest, bands)
    save_manifest(manifest, args.out)
    if args.csv is not None:
        write_split_csv(manifest, args.csv)
    for band in manifest.bands:
        n = sum(1 for labels in manifest.band_labels.values() if band.band in labels)
        print(f"{band.band}: [{band.psnr_low:.2f}, {band.psnr_high:.2f}] dB, {n} pairs")
    return 0


def _cmd_validate_manifest(args) -> int:
    manifest = load_manifest(args.manifest)
    report = validate_pairs(manifest, floor_db=args.floor_db)
    flagged = [r for r in report if r.flag != "ok"]
    for r in report:
        psnr_text = "inf" if math.isinf(r.psnr) else f"{r.psnr:.2f}"
        print(f"{r.pair_id}: psnr={psnr_text} dB [{r.flag}]")
    print(f"{len(report)} pairs, {len(flagged)} flagged")
    if args.out is not None:
        doc = [
            {
                "pair_id": r.pair_id,
                "psnr": "inf" if math.isinf(r.psnr) else r.psnr,
                "flag": r.flag,
            }
            for r in report
        ]
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    if args.save is not None:
        save_manifest(manifest, args.save)
    return 0


def _cmd_pipeline(args) -> int:
    job = load_job(args.config)
    config = job.config
    if args.workers is not None:
        config = PipelineConfig(
            sr_command=config.sr_command,
            sr_scale=config.sr_scale,
            ordering=config.ordering,
            focus_model_path=config.focus_model_path,
            workers=args.workers,
            timeout_seconds=config.timeout_seconds,
        )
    manifest = load_manifest(job.manifest_path)
    out_dir = Path(args.out_dir)
    report = run_pipeline(
        manifest,
        job.gt_path,
        job.detections,
        config,
        work_dir=out_dir / "images",
        baseline=job.baseline,
    )
    report_path, csv_path = report.write(out_dir)
    routed = sum(1 for r in report.records if r.routed_to_sr)
    failed = sum(1 for r in report.records if r.error is not None)
    print(f"{len(report.records)} images, {routed} routed to SR, {failed} failed")
    for stage, counts in report.stage_counts.items():
        print(f"  {stage}: {counts['succeeded']} ok, {counts['failed']} failed")
    print(f"wrote {report_path} and {csv_path}")
    return 0


def _cmd_ordering(args) -> int:
    config = PipelineConfig(
        sr_command=args.sr_command,
        sr_scale=args.factor,
        workers=1,
        timeout_seconds=args.timeout,
    )
    result = ordering_experiment(args.hq, args.lq, config, args.out_dir)
    lines = ["image_id,branch,psnr,ssim"]
    for row in result.rows:
        psnr_text = "inf" if math.isinf(row.psnr) else f"{row.psnr:.6f}"
        lines.append(f"{row.image_id},{row.branch},{psnr_text},{row.ssim:.6f}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    for branch in ("sr-first", "subsample-first"):
        print(
            f"{branch}: mean psnr {result.mean_psnr(branch):.4f} dB, "
            f"mean ssim {result.mean_ssim(branch):.6f}"
        )
    return 0


def _cmd_report(args) -> int:
    doc = json.loads(Path(args.aggregates).read_text(encoding="utf-8"))
    if isinstance(doc, dict) and "variants" in doc:
        doc = doc["variants"]
    if not isinstance(doc, dict) or not doc:
        raise SrevalError("aggregates file must map variant names to mAP values")
    variants = {}
    for name, vals in doc.items():
        try:
            variants[name] = (float(vals["segm_mAP_50"]), float(vals["segm_mAP_75"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise SrevalError(f"variant {name!r} needs segm_mAP_50/segm_mAP_75") from exc
    baseline = args.baseline if args.baseline is not None else next(iter(variants))
    if baseline not in variants:
        raise SrevalError(f"baseline {baseline!r} not among variants {sorted(variants)}")
    b50, b75 = variants[baseline]
    lines = ["variant,segm_mAP_50,segm_mAP_75,segm_mAP_50_percent_change,segm_mAP_75_percent_change"]
    for name, (m50, m75) in variants.items():
        pc50 = f"{percent_change(b50, m50):.2f}" if b50 > 0 else ""
        pc75 = f"{percent_change(b75, m75):.2f}" if b75 > 0 else ""
        lines.append(f"{name},{m50},{m75},{pc50},{pc75}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {args.out} ({len(variants)} variants, baseline {baseline})")
    return 0


# ---------------------------------------------------------------------------
# parser wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sreval",
        description="Resolution-degradation and super-resolution evaluation toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"sreval {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degrade", help="decimate then upscale back (simulated damage)")
    p.add_argument("image")
    p.add_argument("--factor", type=int, required=True, help="decimation factor >= 1")
    p.add_argument("--kernel", choices=sorted(KERNEL_NAMES), default="bicubic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_degrade)

    p = sub.add_parser("resize", help="resample to a new size")
    p.add_argument("image")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--scale", type=float, help="uniform scale factor")
    grp.add_argument("--size", type=_parse_size, metavar="WxH")
    p.add_argument("--kernel", choices=sorted(KERNEL_NAMES), default="bicubic")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_resize)

    p = sub.add_parser("metrics", help="PSNR/SSIM of an image pair")
    p.add_argument("hq")
    p.add_argument("lq")
    p.add_argument("--lpips", help="LPIPS sidecar CSV (image_id,lpips)")
    p.add_argument("--image-id", help="sidecar key (default: lq filename stem)")
    p.add_argument("--out", help="write scores as JSON")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("ringspec", help="DFT ring-energy spectrum")
    p.add_argument("images", nargs="+", help="png files or directories")
    p.add_argument("--rings", type=int, default=DEFAULT_RING_COUNT)
    p.add_argument("--cutoff", type=int, help="also print high-frequency share")
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--svg", help="grouped-bar SVG output")
    p.set_defaults(func=_cmd_ringspec)

    p = sub.add_parser("calibrate-focus", help="fit the sharp/blurry threshold")
    p.add_argument("--sharp", nargs="+", required=True, help="sharp pngs or directories")
    p.add_argument("--blurry", nargs="+", required=True, help="blurry pngs or directories")
    p.add_argument("--rings", type=int, default=DEFAULT_RING_COUNT)
    p.add_argument("--cutoff", type=int, help="default: rings // 2")
    p.add_argument("--out", required=True, help="model file")
    p.set_defaults(func=_cmd_calibrate_focus)

    p = sub.add_parser("classify", help="label images sharp or blurry")
    p.add_argument("images", nargs="+", help="png files or directories")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="CSV output (image,label)")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("segeval", help="COCO-style segmentation evaluation")
    p.add_argument("--gt", required=True, help="COCO-subset ground-truth JSON")
    p.add_argument("--det", required=True, help="COCO results JSON")
    p.add_argument("--out", required=True, help="EvalSummary JSON")
    p.add_argument("--csv", help="also write the summary as a CSV row")
    p.set_defaults(func=_cmd_segeval)

    p = sub.add_parser("split-spectrum", help="label pairs with nested PSNR bands")
    p.add_argument("--manifest", required=True)
    p.add_argument("--bands", type=_parse_bands,
                   help="e.g. narrow=40:60,middle=25:75,wide=0:100")
    p.add_argument("--out", required=True, help="labeled manifest JSON")
    p.add_argument("--csv", help="band,psnr_low,psnr_high,count summary")
    p.set_defaults(func=_cmd_split_spectrum)

    p = sub.add_parser("validate-manifest", help="PSNR-check every pair")
    p.add_argument("--manifest", required=True)
    p.add_argument("--floor-db", type=float, default=MISPAIR_FLOOR_DB)
    p.add_argument("--out", help="JSON report")
    p.add_argument("--save", help="write manifest with cached psnr")
    p.set_defaults(func=_cmd_validate_manifest)

    p = sub.add_parser("pipeline", help="decision block + external SR + evaluation")
    p.add_argument("--config", required=True, help="job JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int, help="override the job's worker count")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("ordering", help="compare subsample-first vs sr-first chains")
    p.add_argument("--hq", nargs="+", required=True)
    p.add_argument("--lq", nargs="+", required=True)
    p.add_argument("--sr-command", required=True, help="template with {input}/{output}")
    p.add_argument("--factor", type=int, required=True, help="sr scale >= 1")
    p.add_argument("--timeout", type=float, default=300.0)
    p.add_argument("--out", required=True, help="per-image CSV")
    p.add_argument("--out-dir", required=True, help="where branch images land")
    p.set_defaults(func=_cmd_ordering)

    p = sub.add_parser("report", help="percent-change table from variant aggregates")
    p.add_argument("--aggregates", required=True,
                   help="JSON mapping variant -> {segm_mAP_50, segm_mAP_75}")
    p.add_argument("--baseline", help="default: first variant in the file")
    p.add_argument("--out", required=True, help="CSV table")
    p.set_defaults(func=_cmd_report)

    return parser


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SrevalError, FileNotFoundError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
