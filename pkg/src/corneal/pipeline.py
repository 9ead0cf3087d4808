"""End-to-end per-face analysis.

For each eye: crop around the landmarks, rasterize the eye polygon, find
the limbus circle on the Canny edge map, intersect polygon and limbus disc
into the corneal region, threshold it, and keep the bright side as the
specular-highlight mask. The two highlight masks are then registered by
translation and compared with IoU.

Eye labels are viewer-perspective: ``left`` is the eye on the left side of
the image (68-landmark indices 36-41), ``right`` the other (42-47).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edges import CannyParams, canny_stages
from .errors import (
    AnnotationError,
    CornealError,
    DegenerateHistogramError,
    DegenerateLandmarksError,
    EmptyRegionError,
    NoCircleFoundError,
)
from .hough import Circle, detect_limbus
from .imaging import Rect, crop, fill_polygon, mask_count, to_grayscale
from .threshold import ThresholdResult, binarize_above, histogram256, yen_threshold

STATUS_OK = "ok"
STATUS_NO_LEFT = "no_highlight_left"
STATUS_NO_RIGHT = "no_highlight_right"
STATUS_NO_BOTH = "no_highlight_both"


@dataclass(frozen=True)
class EyeLandmarks:
    """Six eye-contour points in full-image pixel coordinates, ordered
    outer corner, two upper-lid points, inner corner, two lower-lid points."""

    points: np.ndarray  # (6, 2) float64

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (6, 2):
            raise AnnotationError(f"expected 6 landmark points, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)

    def bbox(self) -> tuple[float, float, float, float]:
        pts = self.points
        return (float(pts[:, 0].min()), float(pts[:, 1].min()),
                float(pts[:, 0].max()), float(pts[:, 1].max()))


@dataclass(frozen=True)
class FaceAnnotation:
    image_path: str
    left_eye: EyeLandmarks
    right_eye: EyeLandmarks

    def __post_init__(self):
        lx0, ly0, lx1, ly1 = self.left_eye.bbox()
        rx0, ry0, rx1, ry1 = self.right_eye.bbox()
        if lx0 < rx1 and rx0 < lx1 and ly0 < ry1 and ry0 < ly1:
            raise AnnotationError("left/right eye landmark boxes overlap")


@dataclass(frozen=True)
class PipelineParams:
    canny: CannyParams = field(default_factory=CannyParams)
    crop_margin: float = 0.4
    align_search: int = 3
    rescale_right: bool = False
    limbus_r_min_frac: float = 0.15
    limbus_r_max_frac: float = 0.50
    limbus_top_k: int = 5

    def validate(self) -> None:
        self.canny.validate()
        if self.crop_margin < 0:
            raise ValueError("crop_margin must be >= 0")
        if self.align_search < 0:
            raise ValueError("align_search must be >= 0")


@dataclass(frozen=True)
class EyeAnalysis:
    crop: Rect
    eye_mask: np.ndarray       # landmark polygon, crop-local
    limbus: Circle             # crop-local coordinates
    corneal_mask: np.ndarray   # eye_mask intersected with the limbus disc
    highlight: np.ndarray      # bright side of the threshold inside the cornea
    threshold: ThresholdResult | None  # None when the cornea is a flat field


@dataclass(frozen=True)
class PairScore:
    iou: float
    translation: tuple[int, int]  # (dx, dy) applied to the right mask
    status: str


@dataclass(frozen=True)
class FaceReport:
    left: EyeAnalysis | None
    right: EyeAnalysis | None
    score: PairScore | None
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return f"failed:{self.error}"
        return self.score.status


def load_annotation(path, face_index: int = 0) -> FaceAnnotation:
    """Parse a landmark sidecar JSON file.

    Expected schema: ``{"image": "<path>", "faces": [{"left_eye":
    [[x, y], ...6], "right_eye": [[x, y], ...6]}]}`` with pixel coordinates
    (origin top-left, x rightward, y downward; real values allowed).
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such annotation file: {p}")
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise AnnotationError(f"{p}: cannot parse annotation JSON: {e}") from e
    try:
        faces = doc["faces"]
        face = faces[face_index]
        left = np.asarray(face["left_eye"], dtype=np.float64)
        right = np.asarray(face["right_eye"], dtype=np.float64)
    except (KeyError, IndexError, TypeError, ValueError) as e:
        raise AnnotationError(f"{p}: malformed annotation: {e}") from e
    if not (np.isfinite(left).all() and np.isfinite(right).all()):
        raise AnnotationError(f"{p}: landmark coordinates must be finite")
    return FaceAnnotation(
        image_path=str(doc.get("image", "")),
        left_eye=EyeLandmarks(points=left),
        right_eye=EyeLandmarks(points=right),
    )


def eye_crop_box(lm: EyeLandmarks, margin: float, image_w: int, image_h: int) -> Rect:
    """Landmark bounding box expanded by ``margin`` per side, square-padded
    to the larger dimension, then shifted/clamped into the image."""
    x0f, y0f, x1f, y1f = lm.bbox()
    if x1f <= x0f or y1f <= y0f:
        raise DegenerateLandmarksError("landmark bounding box has zero area")
    x0 = math.floor(x0f)
    y0 = math.floor(y0f)
    x1 = math.ceil(x1f)
    y1 = math.ceil(y1f)
    mx = int(round(margin * (x1 - x0)))
    my = int(round(margin * (y1 - y0)))
    x0 -= mx
    x1 += mx
    y0 -= my
    y1 += my
    w = x1 - x0
    h = y1 - y0
    side = max(w, h)
    if w < side:
        pad = side - w
        x0 -= pad // 2
        x1 += pad - pad // 2
    if h < side:
        pad = side - h
        y0 -= pad // 2
        y1 += pad - pad // 2
    # keep the square when it fits, otherwise intersect with the image
    w = min(x1 - x0, image_w)
    h = min(y1 - y0, image_h)
    x0 = min(max(x0, 0), image_w - w)
    y0 = min(max(y0, 0), image_h - h)
    return Rect(x=x0, y=y0, w=w, h=h)


def limbus_disc_mask(circle: Circle, w: int, h: int) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    return (xx - circle.cx) ** 2 + (yy - circle.cy) ** 2 <= circle.r ** 2


def analyze_eye(gray: np.ndarray, lm: EyeLandmarks,
                params: PipelineParams = PipelineParams()) -> EyeAnalysis:
    """Run the single-eye stage chain on a full-image grayscale buffer."""
    params.validate()
    img_h, img_w = gray.shape
    box = eye_crop_box(lm, params.crop_margin, img_w, img_h)
    eye = crop(gray, box)
    local_pts = lm.points - np.array([box.x, box.y], dtype=np.float64)
    eye_mask = fill_polygon(local_pts, box.w, box.h)
    edges, grads = canny_stages(eye, params.canny)
    limbus = detect_limbus(edges, box, grads,
                           r_min_frac=params.limbus_r_min_frac,
                           r_max_frac=params.limbus_r_max_frac,
                           top_k=params.limbus_top_k)
    corneal = eye_mask & limbus_disc_mask(limbus, box.w, box.h)
    if not corneal.any():
        raise EmptyRegionError("corneal region is empty")
    try:
        thr = yen_threshold(histogram256(eye, corneal))
        highlight = binarize_above(eye, corneal, thr.t)
    except DegenerateHistogramError:
        # flat cornea: nothing brighter than the iris, so no highlight
        thr = None
        highlight = np.zeros_like(corneal)
    return EyeAnalysis(crop=box, eye_mask=eye_mask, limbus=limbus,
                       corneal_mask=corneal, highlight=highlight, threshold=thr)


def _scale_mask(mask: np.ndarray, center: tuple[float, float], scale: float) -> np.ndarray:
    """Nearest-neighbor rescale of a mask about ``center`` (inverse mapping)."""
    h, w = mask.shape
    yy, xx = np.mgrid[0:h, 0:w]
    sx = np.rint(center[0] + (xx - center[0]) / scale).astype(np.int64)
    sy = np.rint(center[1] + (yy - center[1]) / scale).astype(np.int64)
    ok = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.zeros_like(mask)
    out[ok] = mask[sy[ok], sx[ok]]
    return out


def translated_iou(left_pts: np.ndarray, right_pts: np.ndarray,
                   base: tuple[int, int], search: int) -> tuple[float, tuple[int, int]]:
    """Max IoU of two pixel-coordinate sets over integer offsets around ``base``.

    Points are (N, 2) arrays of absolute (x, y) indices. Returns the best
    IoU and the winning (dx, dy) translation applied to the right set.
    """
    nl = left_pts.shape[0]
    nr = right_pts.shape[0]
    lx0 = left_pts[:, 0].min()
    ly0 = left_pts[:, 1].min()
    pad = search + 1
    w = int(left_pts[:, 0].max() - lx0) + 2 * pad + 1
    h = int(left_pts[:, 1].max() - ly0) + 2 * pad + 1
    canvas = np.zeros((h, w), dtype=bool)
    canvas[left_pts[:, 1] - ly0 + pad, left_pts[:, 0] - lx0 + pad] = True
    best_iou = -1.0
    best_off = (0, 0)
    for dy in range(-search, search + 1):
        for dx in range(-search, search + 1):
            tx = right_pts[:, 0] + base[0] + dx - lx0 + pad
            ty = right_pts[:, 1] + base[1] + dy - ly0 + pad
            ok = (tx >= 0) & (tx < w) & (ty >= 0) & (ty < h)
            inter = int(np.count_nonzero(canvas[ty[ok], tx[ok]]))
            union = nl + nr - inter
            iou = inter / union
            if iou > best_iou:
                best_iou = iou
                best_off = (int(base[0] + dx), int(base[1] + dy))
    return best_iou, best_off


def align_and_score(left: EyeAnalysis, right: EyeAnalysis,
                    params: PipelineParams = PipelineParams()) -> PairScore:
    """Register the right highlight onto the left by translation and score IoU.

    The base translation maps the right limbus center onto the left one;
    integer offsets within +-align_search of it are searched for the
    maximum IoU. Empty highlight masks short-circuit to iou 0 with a
    status flag instead of an error.
    """
    right_hl = right.highlight
    if params.rescale_right and right.limbus.r > 0:
        scale = left.limbus.r / right.limbus.r
        if scale != 1.0:
            right_hl = _scale_mask(right_hl, (right.limbus.cx, right.limbus.cy), scale)

    n_left = mask_count(left.highlight)
    n_right = mask_count(right_hl)
    if n_left == 0 and n_right == 0:
        return PairScore(iou=0.0, translation=(0, 0), status=STATUS_NO_BOTH)
    if n_left == 0:
        return PairScore(iou=0.0, translation=(0, 0), status=STATUS_NO_LEFT)
    if n_right == 0:
        return PairScore(iou=0.0, translation=(0, 0), status=STATUS_NO_RIGHT)

    lys, lxs = np.nonzero(left.highlight)
    rys, rxs = np.nonzero(right_hl)
    left_pts = np.stack([lxs + left.crop.x, lys + left.crop.y], axis=1).astype(np.int64)
    right_pts = np.stack([rxs + right.crop.x, rys + right.crop.y], axis=1).astype(np.int64)
    left_cx = left.limbus.cx + left.crop.x
    left_cy = left.limbus.cy + left.crop.y
    right_cx = right.limbus.cx + right.crop.x
    right_cy = right.limbus.cy + right.crop.y
    base = (int(round(left_cx - right_cx)), int(round(left_cy - right_cy)))
    iou, offset = translated_iou(left_pts, right_pts, base, params.align_search)
    return PairScore(iou=iou, translation=offset, status=STATUS_OK)


_ERROR_CODES = {
    NoCircleFoundError: "no_circle",
    EmptyRegionError: "empty_cornea",
    DegenerateLandmarksError: "degenerate_landmarks",
    AnnotationError: "annotation",
}


def _error_code(err: CornealError) -> str:
    for klass, code in _ERROR_CODES.items():
        if isinstance(err, klass):
            return code
    return type(err).__name__.removesuffix("Error").lower()


def _landmarks_inside(lm: EyeLandmarks, w: int, h: int) -> bool:
    pts = lm.points
    return bool((pts[:, 0] >= 0).all() and (pts[:, 0] < w).all()
                and (pts[:, 1] >= 0).all() and (pts[:, 1] < h).all())


def analyze_face(img: np.ndarray, ann: FaceAnnotation,
                 params: PipelineParams = PipelineParams()) -> FaceReport:
    """Analyze both eyes and score the pair.

    Per-eye pipeline errors are captured in the report (``error`` set,
    ``score`` None) so batch runs keep going.
    """
    gray = to_grayscale(img)
    h, w = gray.shape
    analyses = {}
    for side, lm in (("left", ann.left_eye), ("right", ann.right_eye)):
        if not _landmarks_inside(lm, w, h):
            return FaceReport(left=analyses.get("left"), right=None, score=None,
                              error=f"{side}:annotation")
        try:
            analyses[side] = analyze_eye(gray, lm, params)
        except CornealError as e:
            return FaceReport(left=analyses.get("left"), right=None, score=None,
                              error=f"{side}:{_error_code(e)}")
    score = align_and_score(analyses["left"], analyses["right"], params)
    return FaceReport(left=analyses["left"], right=analyses["right"], score=score)
