"""Pixel-wise segmentation metrics, dataset HSV statistics, and the
vote-threshold sweep."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import RasterImage, ScoreMap, SegMask
from .errors import EmptyDataset, EmptySelection, ShapeMismatch
from .rgr import RgrParams, refine
from .scorer import ScorerConfig, rgb_to_hsv_array
from .tiler import TileSpec


@dataclass(frozen=True)
class EvalReport:
    """Pixel counts plus the derived ratios.

    Undefined ratios follow the usual segmentation-tooling conventions:
    precision and recall are 1.0 when their denominator is empty (so a
    perfect empty prediction scores perfect), f1 is 0 when P + R = 0,
    and IoU is 1.0 when there is neither predicted nor true foreground.
    """

    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    precision: float
    recall: float
    f1: float
    iou: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "EvalReport":
        precision = tp / (tp + fp) if tp + fp > 0 else 1.0
        recall = tp / (tp + fn) if tp + fn > 0 else 1.0
        f1 = 2.0 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        iou = tp / (tp + fp + fn) if tp + fp + fn > 0 else 1.0
        return cls(tp, fp, fn, tn, precision, recall, f1, iou)

    def to_dict(self) -> dict:
        return {
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "iou": self.iou,
        }


@dataclass(frozen=True)
class MeanReport:
    """Macro aggregate over images: ratio metrics are means of the
    per-image ratios, counts are summed."""

    n_images: int
    precision: float
    recall: float
    f1: float
    iou: float
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int

    def to_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "iou": self.iou,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "true_negatives": self.true_negatives,
        }


def compare(pred: SegMask, truth: SegMask) -> EvalReport:
    """Count the pixel-wise confusion quadruple and derive the ratios."""
    if (pred.height, pred.width) != (truth.height, truth.width):
        raise ShapeMismatch(
            f"prediction is {pred.height}x{pred.width}, truth is {truth.height}x{truth.width}"
        )
    p = pred.values.astype(bool)
    t = truth.values.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = p.size - tp - fp - fn
    return EvalReport.from_counts(tp, fp, fn, tn)


def mean_report(reports: Sequence[EvalReport]) -> MeanReport:
    if not reports:
        raise EmptyDataset("cannot aggregate zero reports")
    n = len(reports)
    return MeanReport(
        n_images=n,
        precision=math.fsum(r.precision for r in reports) / n,
        recall=math.fsum(r.recall for r in reports) / n,
        f1=math.fsum(r.f1 for r in reports) / n,
        iou=math.fsum(r.iou for r in reports) / n,
        true_positives=sum(r.true_positives for r in reports),
        false_positives=sum(r.false_positives for r in reports),
        false_negatives=sum(r.false_negatives for r in reports),
        true_negatives=sum(r.true_negatives for r in reports),
    )


@dataclass(frozen=True)
class HsvStats:
    """Pooled HSV statistics: circular mean / recentered IQR for hue in
    degrees, ordinary mean / IQR for saturation and value in percent."""

    mu_h: float
    iqr_h: float
    mu_s: float
    iqr_s: float
    mu_v: float
    iqr_v: float


def dataset_stats(
    images: Sequence[RasterImage], masks: Sequence[SegMask] | None = None
) -> HsvStats:
    """Pool the (optionally mask-selected) pixels of all images and
    compute their HSV statistics.

    The hue mean is circular (vector averaging, so 350 and 10 degrees
    average to 0); the hue IQR is an ordinary IQR of hues unwrapped to
    (mean - 180, mean + 180]. Per-image partial sums are combined with
    exact summation, so the result is independent of image order.
    """
    if masks is not None and len(masks) != len(images):
        raise ShapeMismatch(f"{len(images)} images but {len(masks)} masks")
    hue_parts: list[np.ndarray] = []
    sat_parts: list[np.ndarray] = []
    val_parts: list[np.ndarray] = []
    for i, image in enumerate(images):
        hsv = rgb_to_hsv_array(image.data)
        if masks is not None:
            mask = masks[i]
            if (mask.height, mask.width) != (image.height, image.width):
                raise ShapeMismatch(f"mask {i} does not match its image")
            select = mask.values.astype(bool)
            hsv = hsv[select]
        else:
            hsv = hsv.reshape(-1, 3)
        if hsv.size:
            hue_parts.append(hsv[:, 0])
            sat_parts.append(hsv[:, 1])
            val_parts.append(hsv[:, 2])
    if not hue_parts:
        raise EmptySelection("no pixels selected for statistics")

    count = sum(h.size for h in hue_parts)
    rad = [np.deg2rad(h) for h in hue_parts]
    mean_cos = math.fsum(float(np.sum(np.cos(r))) for r in rad) / count
    mean_sin = math.fsum(float(np.sum(np.sin(r))) for r in rad) / count
    mu_h = math.degrees(math.atan2(mean_sin, mean_cos)) % 360.0

    hue = np.concatenate(hue_parts)
    rel = (hue - mu_h) % 360.0
    rel = np.where(rel > 180.0, rel - 360.0, rel)
    q25, q75 = np.quantile(np.sort(rel), [0.25, 0.75])
    iqr_h = float(q75 - q25)

    sat = np.sort(np.concatenate(sat_parts))
    val = np.sort(np.concatenate(val_parts))
    mu_s = math.fsum(float(np.sum(p)) for p in sat_parts) / count
    mu_v = math.fsum(float(np.sum(p)) for p in val_parts) / count
    s25, s75 = np.quantile(sat, [0.25, 0.75])
    v25, v75 = np.quantile(val, [0.25, 0.75])
    return HsvStats(
        mu_h=mu_h,
        iqr_h=iqr_h,
        mu_s=100.0 * mu_s,
        iqr_s=100.0 * float(s75 - s25),
        mu_v=100.0 * mu_v,
        iqr_v=100.0 * float(v75 - v25),
    )


def sweep_tau0(
    images: Sequence[RasterImage],
    truths: Sequence[SegMask],
    taus: Sequence[float],
    tile_spec: TileSpec,
    scorer_config: ScorerConfig,
    params: RgrParams,
) -> list[tuple[float, MeanReport]]:
    """Run the full segmentation pipeline per vote threshold and report
    the macro-mean metrics at each one, in input order.

    tau_f is re-derived as 1.25 x tau0 at every step while tau_b stays
    fixed. Scoring and fusion do not depend on tau0, so the normalized
    map is computed once per image and only refinement is repeated.
    """
    from .pipeline import compute_probability_map

    if not taus:
        raise ValueError("need at least one tau0 value")
    if len(images) != len(truths):
        raise ShapeMismatch(f"{len(images)} images but {len(truths)} masks")
    if not images:
        raise EmptyDataset("need at least one image")
    prob_maps: list[ScoreMap] = [
        compute_probability_map(image, tile_spec, scorer_config) for image in images
    ]
    results = []
    for tau in taus:
        tau_params = params.with_tau0(tau)
        reports = [
            compare(refine(image, prob, tau_params), truth)
            for image, prob, truth in zip(images, prob_maps, truths)
        ]
        results.append((tau, mean_report(reports)))
    return results


def format_report_text(report: EvalReport | MeanReport) -> str:
    """Line-oriented key=value rendering."""
    return "".join(f"{key}={value}\n" for key, value in report.to_dict().items())


def sweep_csv_lines(results: Sequence[tuple[float, MeanReport]]) -> list[str]:
    """CSV rows for a sweep curve, one per tau0."""
    lines = ["tau0,precision,recall,f1,iou"]
    for tau, rep in results:
        lines.append(f"{tau:.6g},{rep.precision:.6f},{rep.recall:.6f},{rep.f1:.6f},{rep.iou:.6f}")
    return lines
