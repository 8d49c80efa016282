"""Command-line interface.

Subcommands: `segment` (run the pipeline on images), `evaluate` (score
predictions against ground truth), `sweep` (vote-threshold curve),
`stats` (dataset HSV statistics), `gridsearch` (tune the HSV baseline),
and `serve` (start the annotation HTTP service).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import evaluation
from .core import RasterImage, SegMask, load_image, load_mask, save_mask
from .errors import FlowerSegError, UnpairedFiles
from .evaluation import HsvStats, compare, dataset_stats, format_report_text, mean_report
from .pipeline import segment
from .rgr import RgrParams
from .scorer import (
    HsvScorerConfig,
    HsvThresholds,
    OracleScorerConfig,
    PrecomputedScorerConfig,
    grid_from_axes,
    grid_search_hsv,
    write_scoremap_pair,
)
from .tiler import TileSpec

OVERLAY_ALPHA = 0.5
COLOR_TRUE_POSITIVE = np.array([0, 0, 255], dtype=np.float64)  # blue
COLOR_FALSE_NEGATIVE = np.array([255, 0, 0], dtype=np.float64)  # red
COLOR_FALSE_POSITIVE = np.array([255, 105, 180], dtype=np.float64)  # pink
COLOR_BOUNDARY = np.array([0, 255, 0], dtype=np.uint8)  # green


def _red_channel_oracle(pixels: np.ndarray):
    """Built-in synthetic scorer: foreground evidence is the red channel."""
    fg = pixels[:, :, 0].astype(np.float64) / 255.0
    return fg, 1.0 - fg


def _add_tile_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tile-size", type=int, default=321,
                        help="square tile side in pixels (155 suits ~2.7K-wide images)")
    parser.add_argument("--overlap", type=float, default=0.10,
                        help="linear overlap fraction between neighboring tiles")


def _add_scorer_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scorer", choices=["hsv", "precomputed", "oracle"], default="hsv")
    parser.add_argument("--scoremap-dir", type=Path, default=None,
                        help="directory of .bsgs sidecar files (precomputed scorer)")
    parser.add_argument("--hue-lo", type=float, default=0.0)
    parser.add_argument("--hue-hi", type=float, default=360.0)
    parser.add_argument("--sat-lo", type=float, default=0.0)
    parser.add_argument("--sat-hi", type=float, default=1.0)
    parser.add_argument("--val-lo", type=float, default=0.0)
    parser.add_argument("--val-hi", type=float, default=1.0)
    parser.add_argument("--min-region-area", type=int, default=0)


def _add_rgr_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau0", type=float, default=0.3, help="cluster vote threshold")
    parser.add_argument("--tau-b", type=float, default=0.1, help="background confidence threshold")
    parser.add_argument("--tau-f", type=float, default=None,
                        help="foreground confidence threshold (default 1.25 x tau0)")
    parser.add_argument("--mc-runs", type=int, default=5)
    parser.add_argument("--seed-fraction", type=float, default=0.25)
    parser.add_argument("--theta", type=float, default=0.1,
                        help="max color distance for region growing (normalized RGB)")
    parser.add_argument("--seed", type=int, default=0, help="seed for all randomness")


def _add_common_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out-dir", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flowerseg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_seg = sub.add_parser("segment", help="segment images into flower masks")
    p_seg.add_argument("images", nargs="+", type=Path)
    _add_tile_args(p_seg)
    _add_scorer_args(p_seg)
    _add_rgr_args(p_seg)
    _add_common_args(p_seg)
    p_seg.add_argument("--threshold-only", action="store_true",
                       help="skip refinement; threshold the normalized map at tau0")
    p_seg.add_argument("--overlay", action="store_true", help="also write overlay images")
    p_seg.add_argument("--truth-dir", type=Path, default=None,
                       help="ground-truth masks for tri-color overlays")
    p_seg.add_argument("--save-scores", action="store_true",
                       help="also write fused raw score maps in .bsgs format")

    p_eval = sub.add_parser("evaluate", help="compare predictions against ground truth")
    p_eval.add_argument("--pred-dir", type=Path, required=True)
    p_eval.add_argument("--truth-dir", type=Path, required=True)
    _add_common_args(p_eval)

    p_sweep = sub.add_parser("sweep", help="metric curve over the vote threshold")
    p_sweep.add_argument("--images-dir", type=Path, required=True)
    p_sweep.add_argument("--truth-dir", type=Path, required=True)
    p_sweep.add_argument("--taus", type=str, default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    _add_tile_args(p_sweep)
    _add_scorer_args(p_sweep)
    _add_rgr_args(p_sweep)
    _add_common_args(p_sweep)

    p_stats = sub.add_parser("stats", help="dataset HSV statistics")
    p_stats.add_argument("--images-dir", type=Path, required=True)
    p_stats.add_argument("--masks-dir", type=Path, default=None,
                         help="restrict statistics to mask-selected pixels")
    p_stats.add_argument("--name", type=str, default=None, help="dataset label in the table")
    _add_common_args(p_stats)

    p_grid = sub.add_parser("gridsearch", help="tune HSV baseline thresholds")
    p_grid.add_argument("--images-dir", type=Path, required=True)
    p_grid.add_argument("--truth-dir", type=Path, required=True)
    p_grid.add_argument("--grid", type=Path, required=True,
                        help="JSON file of axis values, e.g. {\"sat_hi\": [0.2, 0.3]}")
    _add_common_args(p_grid)

    p_serve = sub.add_parser("serve", help="start the scribble-annotation HTTP service")
    p_serve.add_argument("--host", type=str, default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--max-upload-mb", type=int, default=32)
    p_serve.add_argument("--ui", type=Path, default=None,
                         help="directory of built UI assets to serve at /ui")
    return parser


def _tile_spec(args) -> TileSpec:
    return TileSpec(tile_size=args.tile_size, overlap_fraction=args.overlap)


def _rgr_params(args) -> RgrParams:
    return RgrParams(
        tau0=args.tau0,
        tau_b=args.tau_b,
        tau_f=args.tau_f,
        mc_runs=args.mc_runs,
        seed_fraction=args.seed_fraction,
        theta=args.theta,
        rng_seed=args.seed,
    )


def _scorer_config(args, image_stem: str):
    if args.scorer == "hsv":
        return HsvScorerConfig(HsvThresholds(
            hue_lo=args.hue_lo, hue_hi=args.hue_hi,
            sat_lo=args.sat_lo, sat_hi=args.sat_hi,
            val_lo=args.val_lo, val_hi=args.val_hi,
            min_region_area=args.min_region_area,
        ))
    if args.scorer == "precomputed":
        if args.scoremap_dir is None:
            raise FlowerSegError("--scoremap-dir is required with --scorer precomputed")
        return PrecomputedScorerConfig(directory=args.scoremap_dir, image_stem=image_stem)
    return OracleScorerConfig(score_fn=_red_channel_oracle)


def render_overlay(
    image: RasterImage, mask: SegMask, truth: SegMask | None = None
) -> RasterImage:
    """Overlay for visual inspection: tri-color TP/FN/FP tint when truth
    is available, plain mask boundary otherwise."""
    out = image.data.astype(np.float64).copy()
    if truth is not None:
        p = mask.values.astype(bool)
        t = truth.values.astype(bool)
        for region, color in (
            (p & t, COLOR_TRUE_POSITIVE),
            (~p & t, COLOR_FALSE_NEGATIVE),
            (p & ~t, COLOR_FALSE_POSITIVE),
        ):
            out[region] = (1 - OVERLAY_ALPHA) * out[region] + OVERLAY_ALPHA * color
        result = out.astype(np.uint8)
    else:
        m = mask.values.astype(bool)
        boundary = m & ~ndimage.binary_erosion(m)
        result = out.astype(np.uint8)
        result[boundary] = COLOR_BOUNDARY
    return RasterImage(result)


def _save_image(image: RasterImage, path: Path) -> None:
    from PIL import Image

    Image.fromarray(image.data).save(path)


def _cmd_segment(args) -> int:
    if args.workers < 1:
        raise FlowerSegError("--workers must be >= 1")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    spec = _tile_spec(args)
    params = _rgr_params(args)
    for image_path in args.images:
        written: list[Path] = []
        try:
            image = load_image(image_path)
            config = _scorer_config(args, image_path.stem)
            result = segment(image, spec, config, params,
                             workers=args.workers, threshold_only=args.threshold_only)
            mask_path = args.out_dir / f"{image_path.stem}.mask.png"
            save_mask(result.mask, mask_path)
            written.append(mask_path)
            if args.overlay:
                truth = None
                if args.truth_dir is not None:
                    truth_path = args.truth_dir / f"{image_path.stem}.png"
                    if truth_path.is_file():
                        truth = load_mask(truth_path)
                overlay_path = args.out_dir / f"{image_path.stem}.overlay.png"
                _save_image(render_overlay(image, result.mask, truth), overlay_path)
                written.append(overlay_path)
            if args.save_scores:
                scores_path = args.out_dir / f"{image_path.stem}.scores.bsgs"
                write_scoremap_pair(scores_path, result.raw_fg, result.raw_bg)
                written.append(scores_path)
            print(f"{image_path}: {int(result.mask.values.sum())} flower pixels "
                  f"-> {mask_path}")
        except Exception:
            for path in written:
                path.unlink(missing_ok=True)
            raise
    return 0


def _stem_key(path: Path) -> str:
    stem = path.stem
    return stem[: -len(".mask")] if stem.endswith(".mask") else stem


def _paired_masks(pred_dir: Path, truth_dir: Path) -> list[tuple[str, Path, Path]]:
    def masks_in(directory: Path) -> dict[str, Path]:
        return {
            _stem_key(p): p
            for p in sorted(directory.glob("*.png"))
            if not p.stem.endswith(".overlay")
        }

    preds = masks_in(pred_dir)
    truths = masks_in(truth_dir)
    missing_truth = sorted(set(preds) - set(truths))
    missing_pred = sorted(set(truths) - set(preds))
    if missing_truth or missing_pred:
        raise UnpairedFiles(
            f"unpaired files: no truth for {missing_truth}, no prediction for {missing_pred}"
        )
    if not preds:
        raise UnpairedFiles("no .png files to pair")
    return [(stem, preds[stem], truths[stem]) for stem in sorted(preds)]


def _cmd_evaluate(args) -> int:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    pairs = _paired_masks(args.pred_dir, args.truth_dir)
    per_image = {}
    reports = []
    for stem, pred_path, truth_path in pairs:
        report = compare(load_mask(pred_path), load_mask(truth_path))
        per_image[stem] = report
        reports.append(report)
        print(f"[{stem}]")
        print(format_report_text(report), end="")
    aggregate = mean_report(reports)
    print("[aggregate]")
    print(format_report_text(aggregate), end="")
    payload = {
        "images": {stem: rep.to_dict() for stem, rep in per_image.items()},
        "aggregate": aggregate.to_dict(),
    }
    report_path = args.out_dir / "evaluation.json"
    report_path.write_text(json.dumps(payload, indent=2))
    print(f"wrote {report_path}")
    return 0


def _load_image_truth_pairs(images_dir: Path, truth_dir: Path):
    image_paths = sorted(
        p for p in images_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    pairs = []
    missing = []
    for p in image_paths:
        truth_path = truth_dir / f"{p.stem}.png"
        if truth_path.is_file():
            pairs.append((load_image(p), load_mask(truth_path)))
        else:
            missing.append(p.name)
    if missing:
        raise UnpairedFiles(f"no ground truth for {missing}")
    if not pairs:
        raise UnpairedFiles(f"no images found in {images_dir}")
    return pairs


def _cmd_sweep(args) -> int:
    if args.workers < 1:
        raise FlowerSegError("--workers must be >= 1")
    args.out_dir.mkdir(parents=True, exist_ok=True)
    pairs = _load_image_truth_pairs(args.images_dir, args.truth_dir)
    taus = [float(t) for t in args.taus.split(",") if t.strip()]
    images = [img for img, _ in pairs]
    truths = [truth for _, truth in pairs]
    config = _scorer_config(args, image_stem="")
    results = evaluation.sweep_tau0(images, truths, taus, _tile_spec(args),
                                    config, _rgr_params(args))
    csv_path = args.out_dir / "sweep.csv"
    csv_path.write_text("\n".join(evaluation.sweep_csv_lines(results)) + "\n")
    plot_path = args.out_dir / "sweep.png"
    _plot_sweep(results, plot_path)
    for tau, rep in results:
        print(f"tau0={tau:.3f} f1={rep.f1:.4f} iou={rep.iou:.4f} "
              f"recall={rep.recall:.4f} precision={rep.precision:.4f}")
    print(f"wrote {csv_path} and {plot_path}")
    return 0


def _plot_sweep(results, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    taus = [tau for tau, _ in results]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(taus, [r.f1 for _, r in results], marker="o", label="F1")
    ax.plot(taus, [r.recall for _, r in results], marker="s", label="recall")
    ax.plot(taus, [r.precision for _, r in results], marker="^", label="precision")
    ax.set_xlabel("vote threshold")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def format_stats_table(rows: list[tuple[str, HsvStats]]) -> str:
    """Render like the dataset-characterization tables: one row per
    dataset, circular hue statistics then S and V in percent."""
    header1 = f"{'':16s}{'H [0-360]':>16s}{'S [%]':>16s}{'V [%]':>16s}"
    header2 = (f"{'dataset':16s}{'mu_H':>8s}{'IQR_H':>8s}"
               f"{'mu_S':>8s}{'IQR_S':>8s}{'mu_V':>8s}{'IQR_V':>8s}")
    lines = [header1, header2]
    for name, s in rows:
        lines.append(
            f"{name:16s}{s.mu_h:8.1f}{s.iqr_h:8.1f}"
            f"{s.mu_s:8.1f}{s.iqr_s:8.1f}{s.mu_v:8.1f}{s.iqr_v:8.1f}"
        )
    return "\n".join(lines)


def _cmd_stats(args) -> int:
    image_paths = sorted(
        p for p in args.images_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    if not image_paths:
        raise FlowerSegError(f"no images found in {args.images_dir}")
    images = [load_image(p) for p in image_paths]
    masks = None
    if args.masks_dir is not None:
        masks = [load_mask(args.masks_dir / f"{p.stem}.png") for p in image_paths]
    stats = dataset_stats(images, masks)
    name = args.name or args.images_dir.name
    print(format_stats_table([(name, stats)]))
    return 0


def _cmd_gridsearch(args) -> int:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    pairs = _load_image_truth_pairs(args.images_dir, args.truth_dir)
    axes = json.loads(args.grid.read_text())
    candidates = grid_from_axes(
        hue_los=axes.get("hue_lo", (0.0,)),
        hue_his=axes.get("hue_hi", (360.0,)),
        sat_los=axes.get("sat_lo", (0.0,)),
        sat_his=axes.get("sat_hi", (1.0,)),
        val_los=axes.get("val_lo", (0.0,)),
        val_his=axes.get("val_hi", (1.0,)),
        min_region_areas=axes.get("min_region_area", (0,)),
    )
    best, report = grid_search_hsv(pairs, candidates)
    print(f"best thresholds: hue [{best.hue_lo}, {best.hue_hi}] "
          f"sat [{best.sat_lo}, {best.sat_hi}] val [{best.val_lo}, {best.val_hi}] "
          f"min_region_area {best.min_region_area}")
    print(format_report_text(report), end="")
    out_path = args.out_dir / "gridsearch.json"
    out_path.write_text(json.dumps({
        "thresholds": {
            "hue_lo": best.hue_lo, "hue_hi": best.hue_hi,
            "sat_lo": best.sat_lo, "sat_hi": best.sat_hi,
            "val_lo": best.val_lo, "val_hi": best.val_hi,
            "min_region_area": best.min_region_area,
        },
        "report": report.to_dict(),
    }, indent=2))
    print(f"wrote {out_path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        max_upload_bytes=args.max_upload_mb * 1024 * 1024,
        ui_dir=str(args.ui) if args.ui else None,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "segment": _cmd_segment,
    "evaluate": _cmd_evaluate,
    "sweep": _cmd_sweep,
    "stats": _cmd_stats,
    "gridsearch": _cmd_gridsearch,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FlowerSegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
