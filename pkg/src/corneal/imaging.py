"""Pixel buffers, masks, rectangles, and polygon rasterization.

Conventions used throughout the package:

* RGB images are ``uint8`` arrays of shape (H, W, 3), grayscale images are
  ``uint8`` arrays of shape (H, W), binary masks are ``bool`` arrays of
  shape (H, W). All are row-major with the origin at the top-left corner,
  x growing rightward and y downward.
* Real-valued point coordinates address pixel centers at (x + 0.5, y + 0.5)
  only for polygon rasterization; every other stage works on integer pixel
  indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptImageError,
    DegeneratePolygonError,
    DimensionMismatchError,
    OutOfBoundsError,
    UnsupportedFormatError,
)

_ALLOWED_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle: top-left corner (x, y), extent (w, h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"rect extent must be positive, got {self.w}x{self.h}")


def load_image(path) -> np.ndarray:
    """Decode a PNG or baseline JPEG into an (H, W, 3) uint8 RGB array.

    16-bit sources are rescaled to 8 bits; alpha channels are discarded.
    Raises FileNotFoundError, UnsupportedFormatError, or CorruptImageError.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"no such image file: {p}")
    try:
        with Image.open(p) as im:
            if im.format not in _ALLOWED_FORMATS:
                raise UnsupportedFormatError(
                    f"{p}: format {im.format!r} not supported (PNG/JPEG only)")
            im.load()
            if im.mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(im, dtype=np.float64)
                arr = np.rint(arr * (255.0 / 65535.0))
                im = Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), mode="L")
            rgb = im.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as e:
        raise CorruptImageError(f"{p}: not a decodable image") from e
    except OSError as e:
        raise CorruptImageError(f"{p}: truncated or corrupt image data") from e


def save_image(img: np.ndarray, path) -> None:
    """Write an (H, W, 3) uint8 RGB array as PNG."""
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected (H, W, 3) uint8 RGB array")
    Image.fromarray(img, mode="RGB").save(Path(path), format="PNG")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma: round(0.299 R + 0.587 G + 0.114 B), computed in integers."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("expected (H, W, 3) RGB array")
    c = img.astype(np.uint32)
    luma = (299 * c[:, :, 0] + 587 * c[:, :, 1] + 114 * c[:, :, 2] + 500) // 1000
    return luma.astype(np.uint8)


def crop(img: np.ndarray, r: Rect) -> np.ndarray:
    """Extract the sub-image under ``r``; the rect must lie fully inside."""
    h, w = img.shape[:2]
    if r.x < 0 or r.y < 0 or r.x + r.w > w or r.y + r.h > h:
        raise OutOfBoundsError(
            f"rect {r} exceeds image bounds {w}x{h}")
    return img[r.y:r.y + r.h, r.x:r.x + r.w].copy()


def polygon_area(points: np.ndarray) -> float:
    """Signed shoelace area of an (N, 2) vertex array."""
    x = points[:, 0]
    y = points[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def fill_polygon(points, w: int, h: int) -> np.ndarray:
    """Rasterize a polygon into a (h, w) bool mask, even-odd rule.

    A pixel is set when its center (x + 0.5, y + 0.5) lies inside the
    polygon. Vertices are (x, y) pairs in any iterable order; the polygon
    closes itself.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise DegeneratePolygonError("polygon needs at least 3 (x, y) vertices")
    if polygon_area(pts) == 0.0:
        raise DegeneratePolygonError("polygon has zero area")

    px = np.arange(w, dtype=np.float64) + 0.5
    py = np.arange(h, dtype=np.float64) + 0.5
    gx = px[None, :]
    gy = py[:, None]
    inside = np.zeros((h, w), dtype=bool)
    x1 = pts[:, 0]
    y1 = pts[:, 1]
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)
    for i in range(pts.shape[0]):
        if y1[i] == y2[i]:
            continue
        crosses = (y1[i] > gy) != (y2[i] > gy)
        xint = x1[i] + (gy - y1[i]) * (x2[i] - x1[i]) / (y2[i] - y1[i])
        inside ^= crosses & (gx < xint)
    return inside


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionMismatchError(f"mask shapes differ: {a.shape} vs {b.shape}")


def mask_intersect(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return a & b


def mask_union(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_same_shape(a, b)
    return a | b


def mask_count(a: np.ndarray) -> int:
    return int(np.count_nonzero(a))
