"""Diagnostic overlay: limbus circles and highlight masks drawn on the face."""

from __future__ import annotations

import numpy as np

from .pipeline import EyeAnalysis, FaceReport

LIMBUS_COLOR = (40, 90, 230)      # blue
LEFT_HL_COLOR = (40, 200, 60)     # green
RIGHT_HL_COLOR = (230, 50, 40)    # red


def _paint_mask(img: np.ndarray, eye: EyeAnalysis, mask: np.ndarray, color) -> None:
    ys, xs = np.nonzero(mask)
    img[ys + eye.crop.y, xs + eye.crop.x] = color


def _stroke_circle(img: np.ndarray, eye: EyeAnalysis, color) -> None:
    c = eye.limbus
    h, w = eye.eye_mask.shape
    yy, xx = np.mgrid[0:h, 0:w]
    ring = np.abs(np.hypot(xx - c.cx, yy - c.cy) - c.r) <= 0.75
    _paint_mask(img, eye, ring, color)


def render_overlay(img: np.ndarray, report: FaceReport) -> np.ndarray:
    """Copy of ``img`` with the detected corneal circles (blue) and the two
    eyes' highlight masks (green = left, red = right) painted in."""
    out = img.copy()
    for eye, hl_color in ((report.left, LEFT_HL_COLOR),
                          (report.right, RIGHT_HL_COLOR)):
        if eye is None:
            continue
        _stroke_circle(out, eye, LIMBUS_COLOR)
        _paint_mask(out, eye, eye.highlight, hl_color)
    return out
