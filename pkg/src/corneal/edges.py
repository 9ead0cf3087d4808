"""Canny edge detection: Gaussian smoothing, Sobel gradients, NMS, hysteresis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ImageTooSmallError, InvalidSigmaError


@dataclass(frozen=True)
class CannyParams:
    """Detector knobs. Thresholds are fractions of the max gradient magnitude
    in the image, which makes the edge map stable across exposure changes."""

    sigma: float = 1.4
    low: float = 0.1
    high: float = 0.25

    def validate(self) -> None:
        if self.sigma <= 0:
            raise InvalidSigmaError(f"sigma must be > 0, got {self.sigma}")
        if not (0.0 <= self.low < self.high <= 1.0):
            raise ValueError(
                f"need 0 <= low < high <= 1, got low={self.low} high={self.high}")


@dataclass(frozen=True)
class GradientField:
    """Per-pixel Sobel responses. ``direction`` is atan2(gy, gx) in (-pi, pi]."""

    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction: np.ndarray

    @property
    def shape(self):
        return self.magnitude.shape


def gaussian_kernel(sigma: float) -> np.ndarray:
    """1-D sampled Gaussian, radius ceil(3 sigma), normalized to sum 1."""
    if sigma <= 0:
        raise InvalidSigmaError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    i = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(i * i) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge-replicated borders, rounded to uint8."""
    k = gaussian_kernel(sigma)
    radius = (len(k) - 1) // 2
    h, w = img.shape
    padded = np.pad(img.astype(np.float64), radius, mode="edge")
    tmp = np.zeros((h + 2 * radius, w), dtype=np.float64)
    for j in range(2 * radius + 1):
        tmp += k[j] * padded[:, j:j + w]
    out = np.zeros((h, w), dtype=np.float64)
    for j in range(2 * radius + 1):
        out += k[j] * tmp[j:j + h, :]
    return np.rint(out).astype(np.uint8)


def sobel_gradients(img: np.ndarray) -> GradientField:
    """3x3 Sobel gradients with replicated borders.

    gx is positive where intensity increases to the right, gy where it
    increases downward.
    """
    h, w = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmallError(f"need at least 3x3 image, got {w}x{h}")
    p = np.pad(img.astype(np.float64), 1, mode="edge")
    gx = (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]) \
        - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    gy = (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]) \
        - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    mag = np.hypot(gx, gy)
    direction = np.arctan2(gy, gx)
    return GradientField(gx=gx, gy=gy, magnitude=mag, direction=direction)


def quantize_directions(direction: np.ndarray) -> np.ndarray:
    """Fold gradient angles to [0, 180) degrees and bucket into 4 NMS bins."""
    ang = np.degrees(direction) % 180.0
    dbin = np.zeros(ang.shape, dtype=np.uint8)
    dbin[(ang >= 22.5) & (ang < 67.5)] = 1
    dbin[(ang >= 67.5) & (ang < 112.5)] = 2
    dbin[(ang >= 112.5) & (ang < 157.5)] = 3
    return dbin


def canny_stages(img: np.ndarray, params: CannyParams = CannyParams()):
    """Run the full detector and return (edge map, gradient field).

    The gradient field is computed on the blurred image; callers that feed
    the Hough stage reuse it for gradient-gated voting.
    """
    params.validate()
    blurred = gaussian_blur(img, params.sigma)
    grads = sobel_gradients(blurred)
    suppressed = kernels.nonmax_suppress(grads.magnitude, quantize_directions(grads.direction))
    max_mag = float(grads.magnitude.max())
    if max_mag == 0.0:
        return np.zeros(img.shape, dtype=bool), grads
    strong = suppressed >= params.high * max_mag
    weak = (suppressed >= params.low * max_mag) & (suppressed > 0.0)
    strong &= weak
    edges = kernels.hysteresis(strong, weak)
    return edges, grads


def canny(img: np.ndarray, params: CannyParams = CannyParams()) -> np.ndarray:
    """Binary edge map of ``img``; see canny_stages for the stage breakdown."""
    edges, _ = canny_stages(img, params)
    return edges
