"""Region histograms and Yen's maximum-correlation threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHistogramError,
    DimensionMismatchError,
    EmptyRegionError,
)


@dataclass(frozen=True)
class Histogram256:
    counts: np.ndarray  # (256,) int64
    total: int


@dataclass(frozen=True)
class ThresholdResult:
    t: int  # split bin: foreground is intensity > t
    criterion: float


def histogram256(img: np.ndarray, region: np.ndarray) -> Histogram256:
    """Intensity histogram of the pixels selected by ``region``."""
    if img.shape != region.shape:
        raise DimensionMismatchError(
            f"image {img.shape} and region {region.shape} differ")
    values = img[region]
    if values.size == 0:
        raise EmptyRegionError("region mask selects no pixels")
    counts = np.bincount(values, minlength=256).astype(np.int64)
    return Histogram256(counts=counts, total=int(values.size))


def yen_threshold(hist: Histogram256) -> ThresholdResult:
    """Maximize the Yen criterion over all 255 split points.

    With normalized bins p_i, prefix mass P1(t), prefix/suffix squared-mass
    G1(t) and G2(t), the criterion is

        TC(t) = -ln(G1(t) * G2(t)) + 2 ln(P1(t) * (1 - P1(t)))

    evaluated only where both sides hold mass, so no NaN or infinity can
    escape. Ties resolve to the smallest t. The suffix sums accumulate from
    bin 255 downward, mirroring the exhaustive-scan reference exactly.
    """
    counts = hist.counts
    if np.count_nonzero(counts) < 2:
        raise DegenerateHistogramError("histogram mass sits in a single bin")
    p = counts.astype(np.float64) / float(hist.total)
    psq = p * p
    P1 = np.cumsum(p)
    G1 = np.cumsum(psq)
    suffix_sq = np.cumsum(psq[::-1])[::-1]  # suffix_sq[k] = sum_{i >= k} p_i^2
    cum_counts = np.cumsum(counts)

    valid = (cum_counts[:-1] > 0) & (cum_counts[:-1] < hist.total)
    tc = np.full(255, -np.inf)
    idx = np.flatnonzero(valid)
    g1 = G1[idx]
    g2 = suffix_sq[idx + 1]
    p1 = P1[idx]
    tc[idx] = -np.log(g1 * g2) + 2.0 * np.log(p1 * (1.0 - p1))
    t = int(np.argmax(tc))
    return ThresholdResult(t=t, criterion=float(tc[t]))


def binarize_above(img: np.ndarray, region: np.ndarray, t: int) -> np.ndarray:
    """Mask of region pixels with intensity strictly above ``t``."""
    if img.shape != region.shape:
        raise DimensionMismatchError(
            f"image {img.shape} and region {region.shape} differ")
    return region & (img > t)
