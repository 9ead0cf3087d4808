"""Batch scoring, score distributions, ROC curve and AUC.

The positive class is ``fake`` and the detector fires on LOW IoU: a record
is predicted fake when its iou is at or below the sweep threshold. Records
whose pipeline failed outright (status ``failed:*``) are excluded from the
curve; records that completed with empty highlight masks keep their
flagged iou of 0 and stay in, since a missing highlight on one eye is
itself an inconsistency signal.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CornealError,
    MalformedCurveError,
    ManifestError,
    SingleClassError,
)
from .hough import Circle
from .imaging import load_image, mask_count
from .pipeline import FaceReport, PipelineParams, analyze_face, load_annotation

LABELS = ("real", "fake", "unknown")


@dataclass(frozen=True)
class ManifestRow:
    image: str
    landmarks: str
    label: str


@dataclass(frozen=True)
class ScoreRecord:
    image: str
    label: str
    status: str
    iou: float
    left_circle: Circle | None = None
    right_circle: Circle | None = None
    left_area: int = 0
    right_area: int = 0

    @property
    def scored(self) -> bool:
        """True when the pipeline completed and the iou is a usable score."""
        return not self.status.startswith("failed:")


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


def read_manifest(path) -> list[ManifestRow]:
    """Parse a manifest CSV (header image,landmarks,label); relative paths
    resolve against the manifest's directory."""
    p = Path(path)
    if not p.is_file():
        raise ManifestError(f"no such manifest: {p}")
    base = p.parent
    rows = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"image", "landmarks", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise ManifestError(
                f"{p}: manifest needs header columns image,landmarks,label")
        for n, row in enumerate(reader, start=2):
            label = (row["label"] or "").strip()
            if label not in LABELS:
                raise ManifestError(f"{p}:{n}: label must be one of {LABELS}")
            rows.append(ManifestRow(
                image=str((base / row["image"]).resolve()) if row["image"] else "",
                landmarks=str((base / row["landmarks"]).resolve()) if row["landmarks"] else "",
                label=label,
            ))
    return rows


def record_from_report(image: str, label: str, report: FaceReport) -> ScoreRecord:
    if report.error is not None or report.score is None:
        return ScoreRecord(image=image, label=label, status=report.status, iou=0.0)
    return ScoreRecord(
        image=image, label=label, status=report.score.status,
        iou=float(report.score.iou),
        left_circle=report.left.limbus, right_circle=report.right.limbus,
        left_area=mask_count(report.left.highlight),
        right_area=mask_count(report.right.highlight),
    )


def evaluate_one(row: ManifestRow, params: PipelineParams) -> ScoreRecord:
    try:
        img = load_image(row.image)
        ann = load_annotation(row.landmarks)
        report = analyze_face(img, ann, params)
    except (CornealError, FileNotFoundError) as e:
        code = type(e).__name__.removesuffix("Error").lower()
        return ScoreRecord(image=row.image, label=row.label,
                           status=f"failed:{code}", iou=0.0)
    return record_from_report(row.image, row.label, report)


def batch_evaluate(rows: list[ManifestRow],
                   params: PipelineParams = PipelineParams(),
                   jobs: int = 1) -> list[ScoreRecord]:
    """Score every manifest row; output order follows the manifest. Row
    failures become ``failed:*`` records instead of aborting the batch."""
    if not rows:
        return []
    if jobs <= 1:
        return [evaluate_one(r, params) for r in rows]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda r: evaluate_one(r, params), rows))


def _split_scores(records) -> tuple[np.ndarray, np.ndarray, int]:
    """(fake ious, real ious, number of excluded failed records)."""
    excluded = sum(1 for r in records if not r.scored)
    fake = np.array([r.iou for r in records if r.scored and r.label == "fake"])
    real = np.array([r.iou for r in records if r.scored and r.label == "real"])
    if fake.size == 0 or real.size == 0:
        raise SingleClassError("need scored records of both labels for a ROC curve")
    return fake, real, excluded


def roc_curve(records: list[ScoreRecord]) -> list[RocPoint]:
    """Sweep thresholds over all distinct iou values plus -inf/+inf sentinels.

    A record is predicted fake when iou <= threshold, so tpr is the fake
    fraction at or below it and fpr the real fraction.
    """
    fake, real, _ = _split_scores(records)
    thresholds = np.concatenate(
        [[-np.inf], np.unique(np.concatenate([fake, real])), [np.inf]])
    points = []
    for t in thresholds:
        tpr = float(np.count_nonzero(fake <= t)) / fake.size
        fpr = float(np.count_nonzero(real <= t)) / real.size
        points.append(RocPoint(threshold=float(t), fpr=fpr, tpr=tpr))
    points.sort(key=lambda q: (q.fpr, q.tpr))
    return points


def auc(points: list[RocPoint]) -> float:
    """Trapezoidal area under the (fpr, tpr) curve."""
    if len(points) < 2:
        raise MalformedCurveError("need at least 2 ROC points")
    fpr = np.array([q.fpr for q in points])
    tpr = np.array([q.tpr for q in points])
    if fpr[0] != 0.0 or fpr[-1] != 1.0 or np.any(np.diff(fpr) < 0):
        raise MalformedCurveError("fpr must be non-decreasing and span 0 to 1")
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) * 0.5))


def mann_whitney_auc(records: list[ScoreRecord]) -> float:
    """P(fake iou < real iou) + 0.5 P(tie): a rank-based cross-check of auc."""
    fake, real, _ = _split_scores(records)
    real_sorted = np.sort(real)
    below = np.searchsorted(real_sorted, fake, side="left")
    at_or_below = np.searchsorted(real_sorted, fake, side="right")
    greater = real.size - at_or_below
    ties = at_or_below - below
    return float(np.sum(greater + 0.5 * ties)) / (fake.size * real.size)


def score_histogram(records: list[ScoreRecord], bins: int):
    """Equal-width per-class iou histograms over [0, 1], top bin right-closed.

    Returns (edges, real counts, fake counts) with ``bins + 1`` edges.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts = {"real": np.zeros(bins, dtype=np.int64),
              "fake": np.zeros(bins, dtype=np.int64)}
    for r in records:
        if not r.scored or r.label not in counts:
            continue
        idx = min(int(r.iou * bins), bins - 1)
        counts[r.label][idx] += 1
    return edges, counts["real"], counts["fake"]


def pick_threshold(records: list[ScoreRecord]) -> float:
    """Operating point maximizing Youden's J = tpr - fpr; ties take lower fpr."""
    points = roc_curve(records)
    finite = [q for q in points if math.isfinite(q.threshold)]
    best = max(finite, key=lambda q: (q.tpr - q.fpr, -q.fpr))
    return best.threshold


# ---------------------------------------------------------------------------
# CSV / SVG emission
# ---------------------------------------------------------------------------

def _circle_fields(c: Circle | None):
    if c is None:
        return ["", "", ""]
    return [f"{c.cx:.1f}", f"{c.cy:.1f}", f"{c.r:.1f}"]


def write_records(records: list[ScoreRecord], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "label", "status", "iou",
                         "left_cx", "left_cy", "left_r",
                         "right_cx", "right_cy", "right_r",
                         "left_area", "right_area"])
        for r in records:
            writer.writerow([r.image, r.label, r.status, f"{r.iou:.6f}",
                             *_circle_fields(r.left_circle),
                             *_circle_fields(r.right_circle),
                             r.left_area, r.right_area])


def read_records(path) -> list[ScoreRecord]:
    p = Path(path)
    if not p.is_file():
        raise ManifestError(f"no such records file: {p}")
    out = []
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        needed = {"image", "label", "status", "iou"}
        if reader.fieldnames is None or not needed.issubset(reader.fieldnames):
            raise ManifestError(f"{p}: not a records CSV")
        for row in reader:
            def circle(prefix):
                if row.get(f"{prefix}_cx"):
                    return Circle(cx=float(row[f"{prefix}_cx"]),
                                  cy=float(row[f"{prefix}_cy"]),
                                  r=float(row[f"{prefix}_r"]))
                return None
            out.append(ScoreRecord(
                image=row["image"], label=row["label"], status=row["status"],
                iou=float(row["iou"]),
                left_circle=circle("left"), right_circle=circle("right"),
                left_area=int(row.get("left_area") or 0),
                right_area=int(row.get("right_area") or 0),
            ))
    return out


def _fmt_threshold(t: float) -> str:
    if t == -np.inf:
        return "-inf"
    if t == np.inf:
        return "inf"
    return f"{t:.6f}"


def write_roc(points: list[RocPoint], auc_value: float, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "fpr", "tpr"])
        for q in points:
            writer.writerow([_fmt_threshold(q.threshold),
                             f"{q.fpr:.6f}", f"{q.tpr:.6f}"])
        fh.write(f"# auc={auc_value:.6f}\n")


def write_histogram(edges: np.ndarray, count_real: np.ndarray,
                    count_fake: np.ndarray, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count_real", "count_fake"])
        for i in range(len(count_real)):
            writer.writerow([f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}",
                             int(count_real[i]), int(count_fake[i])])


_SVG_HEAD = ('<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             'viewBox="0 0 {w} {h}">\n<rect width="{w}" height="{h}" fill="white"/>\n')


def render_roc_svg(points: list[RocPoint], auc_value: float, path,
                   size: int = 360) -> None:
    """Static ROC figure: unit square, diagonal, and the curve."""
    m = 40
    span = size - 2 * m
    def sx(v): return m + v * span
    def sy(v): return size - m - v * span
    parts = [_SVG_HEAD.format(w=size, h=size)]
    parts.append(f'<rect x="{m}" y="{m}" width="{span}" height="{span}" '
                 'fill="none" stroke="#999"/>\n')
    parts.append(f'<line x1="{sx(0)}" y1="{sy(0)}" x2="{sx(1)}" y2="{sy(1)}" '
                 'stroke="#ccc" stroke-dasharray="4 3"/>\n')
    coords = " ".join(f"{sx(q.fpr):.1f},{sy(q.tpr):.1f}" for q in points)
    parts.append(f'<polyline points="{coords}" fill="none" stroke="#1f6fb2" '
                 'stroke-width="2"/>\n')
    parts.append(f'<text x="{m}" y="{m - 12}" font-family="sans-serif" '
                 f'font-size="13">ROC (auc={auc_value:.4f})</text>\n')
    parts.append(f'<text x="{size // 2 - 10}" y="{size - 8}" font-family="sans-serif" '
                 'font-size="11">fpr</text>\n')
    parts.append('</svg>\n')
    Path(path).write_text("".join(parts), encoding="utf-8")


def render_histogram_svg(edges: np.ndarray, count_real: np.ndarray,
                         count_fake: np.ndarray, path,
                         width: int = 420, height: int = 300) -> None:
    """Side-by-side per-bin bars for the two classes."""
    m = 40
    span_x = width - 2 * m
    span_y = height - 2 * m
    top = max(1, int(count_real.max(initial=0)), int(count_fake.max(initial=0)))
    bins = len(count_real)
    bw = span_x / bins
    parts = [_SVG_HEAD.format(w=width, h=height)]
    for i in range(bins):
        for k, (counts, color) in enumerate(
                ((count_real, "#2e8b57"), (count_fake, "#c0392b"))):
            bh = span_y * (int(counts[i]) / top)
            x = m + i * bw + k * (bw / 2)
            parts.append(f'<rect x="{x:.1f}" y="{height - m - bh:.1f}" '
                         f'width="{bw / 2 - 1:.1f}" height="{bh:.1f}" '
                         f'fill="{color}"/>\n')
    parts.append(f'<line x1="{m}" y1="{height - m}" x2="{width - m}" '
                 f'y2="{height - m}" stroke="#333"/>\n')
    parts.append(f'<text x="{m}" y="{m - 12}" font-family="sans-serif" '
                 'font-size="13">IoU distribution (real=green, fake=red)</text>\n')
    parts.append('</svg>\n')
    Path(path).write_text("".join(parts), encoding="utf-8")
