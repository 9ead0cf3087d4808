"""Deterministic synthetic eye-pair renderer and corpus writer.

Scenes place two eyes on a skin background: an almond-shaped opening of
sclera, an iris disc bounded by the limbus circle, bright highlight blobs
on the cornea, an optional upper-lid cut, and seeded Gaussian noise. In
``consistent`` mode both corneas carry the same blob pattern at the same
offsets from their limbus centers (a distant light source lands in the
same spot on both corneas), so the ground-truth masks are exact translates
of each other. The perturbation modes alter the blob count, positions, or
shapes on the right eye; ``independent`` redraws the layout entirely.

Every render is a pure function of (config, seed): corpora are
byte-reproducible.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigOutOfBoundsError
from .hough import Circle
from .imaging import save_image
from .pipeline import EyeLandmarks, FaceAnnotation

MODES = ("consistent", "perturbed_count", "perturbed_position",
         "perturbed_shape", "independent")

# opening semi-axes relative to the limbus radius
OPEN_A = 1.6
OPEN_B = 1.05
_LM_X = 0.45           # mid landmark horizontal offset, fraction of a
_LM_Y = math.sqrt(1.0 - _LM_X ** 2)  # on the ellipse


@dataclass(frozen=True)
class HighlightBlob:
    shape: str = "disc"  # disc | capsule
    offset: tuple[float, float] = (0.0, 0.0)  # from the limbus center, px
    size: float = 3.0    # radius
    intensity: int = 245
    angle: float = 0.0   # capsule axis
    length: float = 0.0  # capsule core half-length


@dataclass(frozen=True)
class EyeGeometry:
    center: tuple[int, int]
    radius: int
    iris_level: int = 65
    sclera_level: int = 160


@dataclass(frozen=True)
class EyeSceneConfig:
    width: int = 256
    height: int = 128
    left: EyeGeometry = EyeGeometry(center=(64, 64), radius=16)
    right: EyeGeometry = EyeGeometry(center=(192, 64), radius=16)
    blobs: tuple[HighlightBlob, ...] = (
        HighlightBlob(offset=(-3.5, -2.0), size=2.8),
        HighlightBlob(offset=(4.0, 3.0), size=2.2, intensity=240),
    )
    occlusion: float = 0.0
    noise_sigma: float = 0.0
    mode: str = "consistent"
    seed: int = 0
    skin_level: int = 172
    edge_softness: float = 0.0  # 0 = hard edges, > 0 = 4x supersampled AA


@dataclass(frozen=True)
class GroundTruth:
    left_limbus: Circle
    right_limbus: Circle
    left_highlight: np.ndarray   # full-image bool masks
    right_highlight: np.ndarray
    label: str                   # consistent | inconsistent


def _validate(cfg: EyeSceneConfig) -> None:
    if cfg.mode not in MODES:
        raise ConfigOutOfBoundsError(f"unknown mode {cfg.mode!r}")
    if not (0.0 <= cfg.occlusion <= 0.5):
        raise ConfigOutOfBoundsError("occlusion fraction must be in [0, 0.5]")
    for eye in (cfg.left, cfg.right):
        cx, cy = eye.center
        a = OPEN_A * eye.radius
        b = OPEN_B * eye.radius
        if cx - a < 0 or cx + a >= cfg.width or cy - b < 0 or cy + b >= cfg.height:
            raise ConfigOutOfBoundsError(
                f"eye at {eye.center} r={eye.radius} does not fit in "
                f"{cfg.width}x{cfg.height}")
    for blob in cfg.blobs:
        if blob.intensity <= max(cfg.left.iris_level, cfg.right.iris_level):
            raise ConfigOutOfBoundsError("blob intensity must exceed iris level")
    gap = (cfg.right.center[0] - OPEN_A * cfg.right.radius) \
        - (cfg.left.center[0] + OPEN_A * cfg.left.radius)
    if gap <= 1:
        raise ConfigOutOfBoundsError("eye openings overlap")


def _blob_mask(blob: HighlightBlob, cx: float, cy: float,
               xx: np.ndarray, yy: np.ndarray) -> np.ndarray:
    bx = cx + blob.offset[0]
    by = cy + blob.offset[1]
    if blob.shape == "capsule" and blob.length > 0:
        ux = math.cos(blob.angle)
        uy = math.sin(blob.angle)
        # distance to the core segment, clamped to its half-length
        t = np.clip((xx - bx) * ux + (yy - by) * uy, -blob.length, blob.length)
        px = bx + t * ux
        py = by + t * uy
        return (xx - px) ** 2 + (yy - py) ** 2 <= blob.size ** 2
    return (xx - bx) ** 2 + (yy - by) ** 2 <= blob.size ** 2


def _paint_eye(img: np.ndarray, xx: np.ndarray, yy: np.ndarray,
               eye: EyeGeometry, blobs, occlusion: float) -> None:
    cx, cy = eye.center
    r = eye.radius
    a = OPEN_A * r
    b = OPEN_B * r
    opening = ((xx - cx) / a) ** 2 + ((yy - cy) / b) ** 2 <= 1.0
    if occlusion > 0:
        opening &= yy >= cy - r * (1.0 - 2.0 * occlusion)
    img[opening] = eye.sclera_level
    iris = ((xx - cx) ** 2 + (yy - cy) ** 2 <= r * r) & opening
    img[iris] = eye.iris_level
    for blob in blobs:
        img[_blob_mask(blob, cx, cy, xx, yy) & iris] = blob.intensity


def _truth_mask(eye: EyeGeometry, blobs, occlusion: float,
                width: int, height: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    xx = xx.astype(np.float64)
    yy = yy.astype(np.float64)
    cx, cy = eye.center
    r = eye.radius
    disc = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
    opening = ((xx - cx) / (OPEN_A * r)) ** 2 + ((yy - cy) / (OPEN_B * r)) ** 2 <= 1.0
    if occlusion > 0:
        opening &= yy >= cy - r * (1.0 - 2.0 * occlusion)
    out = np.zeros((height, width), dtype=bool)
    for blob in blobs:
        out |= _blob_mask(blob, cx, cy, xx, yy)
    return out & disc & opening


def _derive_right_blobs(cfg: EyeSceneConfig) -> tuple[HighlightBlob, ...]:
    if cfg.mode == "consistent":
        return cfg.blobs
    rng = np.random.default_rng([cfg.seed, 101])
    r = cfg.right.radius
    if cfg.mode == "perturbed_count":
        if len(cfg.blobs) > 1:
            return cfg.blobs[:-1]
        return cfg.blobs + (random_blob(rng, r),)
    if cfg.mode == "perturbed_position":
        return tuple(replace(b, offset=_random_offset(rng, r)) for b in cfg.blobs)
    if cfg.mode == "perturbed_shape":
        out = []
        for b in cfg.blobs:
            if b.shape == "disc":
                out.append(replace(b, shape="capsule",
                                   length=b.size * float(rng.uniform(1.5, 2.5)),
                                   angle=float(rng.uniform(0, math.pi)),
                                   size=b.size * float(rng.uniform(0.6, 0.9))))
            else:
                out.append(replace(b, shape="disc", length=0.0,
                                   size=b.size * float(rng.uniform(1.5, 2.2))))
        return tuple(out)
    # independent
    return tuple(random_blob(rng, r) for _ in range(int(rng.integers(2, 4))))


def _random_offset(rng, r: int) -> tuple[float, float]:
    return (float(rng.uniform(-0.45 * r, 0.45 * r)),
            float(rng.uniform(-0.35 * r, 0.45 * r)))


def random_blob(rng, r: int) -> HighlightBlob:
    return HighlightBlob(
        shape="disc",
        offset=_random_offset(rng, r),
        size=float(rng.uniform(0.16 * r, 0.26 * r)),
        intensity=int(rng.integers(235, 252)),
    )


def _landmarks(eye: EyeGeometry, occlusion: float, outer_left: bool) -> EyeLandmarks:
    cx, cy = eye.center
    a = OPEN_A * eye.radius
    b = OPEN_B * eye.radius
    u = _LM_X * a
    y_up = cy - _LM_Y * b
    if occlusion > 0:
        y_up = max(y_up, cy - eye.radius * (1.0 - 2.0 * occlusion))
    y_lo = cy + _LM_Y * b
    if outer_left:
        pts = [(cx - a, cy), (cx - u, y_up), (cx + u, y_up),
               (cx + a, cy), (cx + u, y_lo), (cx - u, y_lo)]
    else:
        pts = [(cx + a, cy), (cx + u, y_up), (cx - u, y_up),
               (cx - a, cy), (cx - u, y_lo), (cx + u, y_lo)]
    return EyeLandmarks(points=np.asarray(pts, dtype=np.float64))


def render_eye_pair(cfg: EyeSceneConfig):
    """Render a scene; returns (rgb image, FaceAnnotation, GroundTruth)."""
    _validate(cfg)
    right_blobs = _derive_right_blobs(cfg)

    ss = 4 if cfg.edge_softness > 0 else 1
    w, h = cfg.width * ss, cfg.height * ss
    yy, xx = np.mgrid[0:h, 0:w]
    # subsample centers expressed in full-resolution pixel-index coordinates
    xx = (xx + 0.5) / ss - 0.5
    yy = (yy + 0.5) / ss - 0.5
    img = np.full((h, w), float(cfg.skin_level))
    _paint_eye(img, xx, yy, cfg.left, cfg.blobs, cfg.occlusion)
    _paint_eye(img, xx, yy, cfg.right, right_blobs, cfg.occlusion)
    if ss > 1:
        img = img.reshape(cfg.height, ss, cfg.width, ss).mean(axis=(1, 3))
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng([cfg.seed, 7])
        img = img + rng.normal(0.0, cfg.noise_sigma, img.shape)
    gray = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)

    ann = FaceAnnotation(
        image_path="",
        left_eye=_landmarks(cfg.left, cfg.occlusion, outer_left=True),
        right_eye=_landmarks(cfg.right, cfg.occlusion, outer_left=False),
    )
    truth = GroundTruth(
        left_limbus=Circle(cx=float(cfg.left.center[0]), cy=float(cfg.left.center[1]),
                           r=float(cfg.left.radius)),
        right_limbus=Circle(cx=float(cfg.right.center[0]), cy=float(cfg.right.center[1]),
                            r=float(cfg.right.radius)),
        left_highlight=_truth_mask(cfg.left, cfg.blobs, cfg.occlusion,
                                   cfg.width, cfg.height),
        right_highlight=_truth_mask(cfg.right, right_blobs, cfg.occlusion,
                                    cfg.width, cfg.height),
        label="consistent" if cfg.mode == "consistent" else "inconsistent",
    )
    return rgb, ann, truth


def truth_pair_iou(truth: GroundTruth) -> float:
    """IoU of the ground-truth masks after aligning the limbus centers."""
    lys, lxs = np.nonzero(truth.left_highlight)
    rys, rxs = np.nonzero(truth.right_highlight)
    if lys.size == 0 or rys.size == 0:
        return 0.0
    dx = int(round(truth.left_limbus.cx - truth.right_limbus.cx))
    dy = int(round(truth.left_limbus.cy - truth.right_limbus.cy))
    left = set(zip(lxs.tolist(), lys.tolist()))
    right = set(zip((rxs + dx).tolist(), (rys + dy).tolist()))
    inter = len(left & right)
    return inter / len(left | right)


# perturbation mix for the inconsistent half of a corpus
_FAKE_MODES = ("independent", "perturbed_position", "perturbed_shape", "perturbed_count")
_FAKE_WEIGHTS = (0.35, 0.30, 0.20, 0.15)


def scene_for_index(base_cfg: EyeSceneConfig, seed: int, index: int,
                    consistent: bool) -> EyeSceneConfig:
    """Randomized scene for corpus entry ``index``, derived only from (seed, index)."""
    rng = np.random.default_rng([seed, index])
    r = int(rng.integers(14, 21))
    span = int(math.ceil(OPEN_A * r)) + 2
    cy = base_cfg.height // 2
    left = EyeGeometry(center=(span + int(rng.integers(0, 5)), cy), radius=r,
                       iris_level=int(rng.integers(55, 76)),
                       sclera_level=int(rng.integers(150, 172)))
    right = EyeGeometry(center=(base_cfg.width - span - int(rng.integers(0, 5)), cy),
                        radius=r,
                        iris_level=left.iris_level + int(rng.integers(-1, 2)),
                        sclera_level=left.sclera_level + int(rng.integers(-2, 3)))
    mode = "consistent" if consistent else str(rng.choice(_FAKE_MODES, p=_FAKE_WEIGHTS))
    # dropping one of two blobs halves the pattern; one of three leaves too much overlap
    n_blobs = 2 if mode == "perturbed_count" else int(rng.integers(2, 4))
    blobs = tuple(random_blob(rng, r) for _ in range(n_blobs))
    return replace(base_cfg, left=left, right=right, blobs=blobs,
                   occlusion=float(rng.uniform(0.0, 0.15)), mode=mode,
                   seed=int(rng.integers(0, 2 ** 31)))


def write_annotation(path, image_name: str, ann: FaceAnnotation) -> None:
    doc = {
        "image": image_name,
        "faces": [{
            "left_eye": [[float(x), float(y)] for x, y in ann.left_eye.points],
            "right_eye": [[float(x), float(y)] for x, y in ann.right_eye.points],
        }],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1) + "\n",
                          encoding="utf-8")


def make_corpus(n_per_class: int, base_cfg: EyeSceneConfig, seed: int,
                out_dir) -> Path:
    """Write ``n_per_class`` consistent and inconsistent scenes plus manifest.

    Produces img_NNNN.png / img_NNNN.json pairs, a ``manifest.csv``
    (image,landmarks,label) and a ``truth.csv`` (image,label,true_iou).
    Returns the manifest path. Consistent scenes are labelled ``real``,
    inconsistent ones ``fake``.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_rows = []
    truth_rows = []
    for i in range(2 * n_per_class):
        consistent = i < n_per_class
        cfg = scene_for_index(base_cfg, seed, i, consistent)
        rgb, ann, truth = render_eye_pair(cfg)
        name = f"img_{i:04d}"
        save_image(rgb, out / f"{name}.png")
        write_annotation(out / f"{name}.json", f"{name}.png", ann)
        label = "real" if consistent else "fake"
        manifest_rows.append((f"{name}.png", f"{name}.json", label))
        truth_rows.append((f"{name}.png", label, truth_pair_iou(truth)))
    manifest = out / "manifest.csv"
    with manifest.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "landmarks", "label"])
        writer.writerows(manifest_rows)
    with (out / "truth.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "label", "true_iou"])
        for name, label, iou in truth_rows:
            writer.writerow([name, label, f"{iou:.6f}"])
    return manifest
