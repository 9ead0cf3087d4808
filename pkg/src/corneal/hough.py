"""Circular Hough transform specialized for locating the corneal limbus."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .edges import GradientField
from .errors import EmptyEdgeMapError, NoCircleFoundError, RadiusRangeError
from .imaging import Rect

# Gradient-gated votes cover +-15 degrees around the gradient line, both
# senses (edge polarity is unknown). Gradient angles are quantized to
# DIRECTION_BINS so arc offset tables can be precomputed per radius.
GATE_HALF_ANGLE = math.radians(15.0)
DIRECTION_BINS = 128

_arc_cache: dict[int, tuple] = {}
_ring_cache: dict[int, tuple] = {}


@dataclass(frozen=True)
class Circle:
    """Circle in crop pixel coordinates (centers at accumulator resolution)."""

    cx: float
    cy: float
    r: float


@dataclass(frozen=True)
class HoughParams:
    r_min: int
    r_max: int
    top_k: int = 5
    gradient_gated: bool = True

    def validate(self) -> None:
        if not (0 < self.r_min <= self.r_max):
            raise RadiusRangeError(f"need 0 < r_min <= r_max, got [{self.r_min}, {self.r_max}]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass(frozen=True)
class CircleCandidate:
    circle: Circle
    votes: int
    score: float  # votes / circumference, comparable across radii


def _dedupe_cells(dx, dy):
    cells = np.stack([np.asarray(dx), np.asarray(dy)], axis=1).astype(np.int32)
    return np.unique(cells, axis=0)


def _arc_table(r: int):
    """Offset cells for every quantized gradient direction at radius r.

    Returns (dx, dy, starts) where starts has DIRECTION_BINS + 1 entries
    indexing the flat offset arrays.
    """
    cached = _arc_cache.get(r)
    if cached is not None:
        return cached
    steps = max(3, int(math.ceil(r * 2.0 * GATE_HALF_ANGLE)) + 1)
    dxs, dys, starts = [], [], [0]
    for b in range(DIRECTION_BINS):
        theta_c = (b + 0.5) * 2.0 * math.pi / DIRECTION_BINS
        ax, ay = [], []
        for sense in (0.0, math.pi):
            t = np.linspace(theta_c + sense - GATE_HALF_ANGLE,
                            theta_c + sense + GATE_HALF_ANGLE, steps)
            ax.append(np.rint(r * np.cos(t)))
            ay.append(np.rint(r * np.sin(t)))
        cells = _dedupe_cells(np.concatenate(ax), np.concatenate(ay))
        dxs.append(cells[:, 0])
        dys.append(cells[:, 1])
        starts.append(starts[-1] + len(cells))
    table = (np.concatenate(dxs), np.concatenate(dys), np.asarray(starts, dtype=np.int64))
    _arc_cache[r] = table
    return table


def _ring_table(r: int):
    """Full-ring offset cells at radius r (single pseudo-bin)."""
    cached = _ring_cache.get(r)
    if cached is not None:
        return cached
    steps = max(8, int(math.ceil(2.0 * math.pi * r)) + 1)
    t = np.linspace(0.0, 2.0 * math.pi, steps, endpoint=False)
    cells = _dedupe_cells(np.rint(r * np.cos(t)), np.rint(r * np.sin(t)))
    table = (cells[:, 0], cells[:, 1], np.asarray([0, len(cells)], dtype=np.int64))
    _ring_cache[r] = table
    return table


def _build_tables(radii, gated: bool):
    dxs, dys = [], []
    starts_all = [0]
    for r in radii:
        dx, dy, st = (_arc_table(int(r)) if gated else _ring_table(int(r)))
        dxs.append(dx)
        dys.append(dy)
        base = starts_all[-1]
        starts_all.extend((st[1:] + base).tolist())
    return (np.ascontiguousarray(np.concatenate(dxs), dtype=np.int32),
            np.ascontiguousarray(np.concatenate(dys), dtype=np.int32),
            np.asarray(starts_all, dtype=np.int64))


def hough_circles(edges: np.ndarray, params: HoughParams,
                  grads: GradientField | None = None) -> list[CircleCandidate]:
    """Vote for circle centers over r in [r_min, r_max] at 1 px resolution.

    Each edge pixel votes for centers one radius away, either around the
    full ring or (gradient_gated) along +-15 degrees of its gradient line.
    Candidates are accumulator peaks ranked by circumference-normalized
    score; peaks closer than r_min / 2 are merged into the stronger one.
    """
    params.validate()
    h, w = edges.shape
    if params.r_max >= max(w, h):
        raise RadiusRangeError(
            f"r_max {params.r_max} must be below max image dimension {max(w, h)}")
    if params.gradient_gated and grads is None:
        raise ValueError("gradient_gated voting requires a GradientField")
    ys, xs = np.nonzero(edges)
    if ys.size == 0:
        raise EmptyEdgeMapError("edge map has no set pixels")
    ys = ys.astype(np.int32)
    xs = xs.astype(np.int32)

    if params.gradient_gated:
        theta = grads.direction[ys, xs] % (2.0 * math.pi)
        bins = np.floor(theta / (2.0 * math.pi) * DIRECTION_BINS).astype(np.int32)
        bins %= DIRECTION_BINS
    else:
        bins = np.zeros(ys.shape, dtype=np.int32)

    radii = np.arange(params.r_min, params.r_max + 1)
    dx, dy, starts = _build_tables(radii, params.gradient_gated)
    acc = np.zeros((len(radii), h, w), dtype=np.int32)
    kernels.cast_votes(ys, xs, bins, starts, dx, dy, acc)

    # best radius per center cell, normalized by circumference
    best_score = np.zeros((h, w), dtype=np.float64)
    best_ri = np.zeros((h, w), dtype=np.int32)
    for ri, r in enumerate(radii):
        s = acc[ri] * (1.0 / (2.0 * math.pi * float(r)))
        better = s > best_score
        best_score[better] = s[better]
        best_ri[better] = ri

    order = np.argsort(-best_score, axis=None, kind="stable")
    min_sep2 = (params.r_min / 2.0) ** 2
    out: list[CircleCandidate] = []
    for idx in order:
        cy, cx = divmod(int(idx), w)
        score = float(best_score[cy, cx])
        if score <= 0.0:
            break
        if any((cy - c.circle.cy) ** 2 + (cx - c.circle.cx) ** 2 < min_sep2 for c in out):
            continue
        ri = int(best_ri[cy, cx])
        out.append(CircleCandidate(
            circle=Circle(cx=float(cx), cy=float(cy), r=float(radii[ri])),
            votes=int(acc[ri, cy, cx]),
            score=score,
        ))
        if len(out) >= params.top_k:
            break
    return out


def detect_limbus(edges: np.ndarray, eye_box: Rect, grads: GradientField,
                  r_min_frac: float = 0.15, r_max_frac: float = 0.50,
                  top_k: int = 5) -> Circle:
    """Pick the limbus circle from an eye-crop edge map.

    Searches radii proportional to the eye-box width, keeps the top
    candidates with at least a quarter of their circumference supported,
    and returns the one centered nearest the crop centroid (ties go to the
    higher score).
    """
    h, w = edges.shape
    r_min = max(3, int(round(r_min_frac * eye_box.w)))
    r_max = min(int(round(r_max_frac * eye_box.w)), max(w, h) - 1)
    if r_max < r_min:
        raise NoCircleFoundError(f"radius bracket empty for {eye_box.w}px eye box")
    try:
        cands = hough_circles(edges, HoughParams(r_min, r_max, top_k=top_k,
                                                 gradient_gated=True), grads)
    except EmptyEdgeMapError:
        raise NoCircleFoundError("no edges in eye crop") from None
    eligible = [c for c in cands
                if c.votes >= 0.25 * 2.0 * math.pi * c.circle.r]
    if not eligible:
        raise NoCircleFoundError(
            f"no circle with >= 25% circumference support among top {top_k}")
    ctr_x = (w - 1) / 2.0
    ctr_y = (h - 1) / 2.0
    best = min(eligible, key=lambda c: (
        (c.circle.cx - ctr_x) ** 2 + (c.circle.cy - ctr_y) ** 2,
        -c.score, c.circle.cy, c.circle.cx))
    return best.circle
