"""Hot inner-loop kernels: numba-jitted by default, pure numpy on demand.

Three loops dominate the pipeline's runtime: non-maximum suppression of the
gradient field, hysteresis edge growth, and circle-accumulator voting. Each
has a numba ``@njit`` implementation and a vectorized pure-numpy fallback.
The numba path is used when numba imports cleanly; set ``CORNEAL_NO_NUMBA=1``
to force the numpy path (useful on platforms without a working JIT and for
the backend benchmark in ``benchmarks/``).

Both paths are exact integer/compare kernels and produce bit-identical
outputs; tests/test_kernels.py asserts the parity.
"""

from __future__ import annotations

import os

import numpy as np

_FORCE_NUMPY = os.environ.get("CORNEAL_NO_NUMBA", "").strip() not in ("", "0")

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised via CORNEAL_NO_NUMBA instead
    numba = None
    HAS_NUMBA = False

NUMBA_ENABLED = HAS_NUMBA and not _FORCE_NUMPY

# Neighbor step per quantized gradient direction bin, as (drow, dcol):
# bin 0 = horizontal gradient, 1 = down-right diagonal, 2 = vertical,
# 3 = down-left diagonal. The suppression tie-break is asymmetric (>= against
# the -step neighbor, > against the +step neighbor) so a two-pixel plateau
# straddling an ideal step edge keeps exactly one pixel.
_NMS_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


# ---------------------------------------------------------------------------
# pure numpy implementations
# ---------------------------------------------------------------------------

def nonmax_suppress_numpy(mag: np.ndarray, dbin: np.ndarray) -> np.ndarray:
    """Zero every pixel that is not a ridge crest along its gradient bin."""
    h, w = mag.shape
    out = np.zeros_like(mag)
    if h < 3 or w < 3:
        return out
    center = mag[1:-1, 1:-1]
    keep = np.zeros(center.shape, dtype=bool)
    for b, (dr, dc) in enumerate(_NMS_STEPS):
        minus = mag[1 - dr:h - 1 - dr, 1 - dc:w - 1 - dc]
        plus = mag[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]
        keep |= (dbin[1:-1, 1:-1] == b) & (center >= minus) & (center > plus)
    out[1:-1, 1:-1] = np.where(keep, center, 0.0)
    return out


def hysteresis_numpy(strong: np.ndarray, weak: np.ndarray) -> np.ndarray:
    """Grow strong seeds through 8-connected weak pixels to a fixed point."""
    cur = strong & weak
    while True:
        grown = cur.copy()
        grown[1:, :] |= cur[:-1, :]
        grown[:-1, :] |= cur[1:, :]
        grown[:, 1:] |= cur[:, :-1]
        grown[:, :-1] |= cur[:, 1:]
        grown[1:, 1:] |= cur[:-1, :-1]
        grown[:-1, :-1] |= cur[1:, 1:]
        grown[1:, :-1] |= cur[:-1, 1:]
        grown[:-1, 1:] |= cur[1:, :-1]
        grown &= weak
        grown |= cur
        if np.array_equal(grown, cur):
            return cur
        cur = grown


def cast_votes_numpy(ys, xs, bins, starts, dx, dy, acc) -> None:
    """Accumulate circle-center votes into ``acc`` (shape n_radii x H x W).

    ``starts`` indexes the flat (dx, dy) offset table per (radius, bin);
    each edge pixel i votes once per offset cell of its bin's arc.
    """
    n_r, h, w = acc.shape
    n_bins = (starts.shape[0] - 1) // n_r
    uniq = np.unique(bins)
    for ri in range(n_r):
        plane = acc[ri].ravel()
        row = ri * n_bins
        for b in uniq:
            sel = np.flatnonzero(bins == b)
            s, e = starts[row + b], starts[row + b + 1]
            if e == s or sel.size == 0:
                continue
            cy = ys[sel][:, None] - dy[s:e][None, :]
            cx = xs[sel][:, None] - dx[s:e][None, :]
            ok = (cy >= 0) & (cy < h) & (cx >= 0) & (cx < w)
            np.add.at(plane, cy[ok].astype(np.int64) * w + cx[ok], 1)


# ---------------------------------------------------------------------------
# numba implementations (compiled lazily, cached on disk)
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _nms_numba(mag, dbin):
        h, w = mag.shape
        out = np.zeros_like(mag)
        for r in range(1, h - 1):
            for c in range(1, w - 1):
                v = mag[r, c]
                b = dbin[r, c]
                if b == 0:
                    m, p = mag[r, c - 1], mag[r, c + 1]
                elif b == 1:
                    m, p = mag[r - 1, c - 1], mag[r + 1, c + 1]
                elif b == 2:
                    m, p = mag[r - 1, c], mag[r + 1, c]
                else:
                    m, p = mag[r - 1, c + 1], mag[r + 1, c - 1]
                if v >= m and v > p:
                    out[r, c] = v
        return out

    @numba.njit(cache=True, nogil=True)
    def _hysteresis_numba(strong, weak):
        h, w = strong.shape
        out = np.zeros((h, w), dtype=np.bool_)
        stack = np.empty((h * w, 2), dtype=np.int64)
        top = 0
        for r in range(h):
            for c in range(w):
                if strong[r, c] and weak[r, c]:
                    out[r, c] = True
                    stack[top, 0] = r
                    stack[top, 1] = c
                    top += 1
        while top > 0:
            top -= 1
            r = stack[top, 0]
            c = stack[top, 1]
            for dr in range(-1, 2):
                for dc in range(-1, 2):
                    nr = r + dr
                    nc = c + dc
                    if 0 <= nr < h and 0 <= nc < w and weak[nr, nc] and not out[nr, nc]:
                        out[nr, nc] = True
                        stack[top, 0] = nr
                        stack[top, 1] = nc
                        top += 1
        return out

    @numba.njit(cache=True, nogil=True, parallel=True)
    def _vote_numba(ys, xs, bins, starts, dx, dy, acc):
        n_r, h, w = acc.shape
        n_bins = (starts.shape[0] - 1) // n_r
        # radius planes are independent, so prange is deterministic
        for ri in numba.prange(n_r):
            plane = acc[ri]
            row = ri * n_bins
            for i in range(ys.shape[0]):
                s = starts[row + bins[i]]
                e = starts[row + bins[i] + 1]
                y = ys[i]
                x = xs[i]
                for k in range(s, e):
                    cy = y - dy[k]
                    cx = x - dx[k]
                    if 0 <= cy < h and 0 <= cx < w:
                        plane[cy, cx] += 1

    def nonmax_suppress_numba(mag, dbin):
        return _nms_numba(np.ascontiguousarray(mag), np.ascontiguousarray(dbin))

    def hysteresis_numba(strong, weak):
        return _hysteresis_numba(np.ascontiguousarray(strong), np.ascontiguousarray(weak))

    def cast_votes_numba(ys, xs, bins, starts, dx, dy, acc):
        _vote_numba(ys, xs, bins, starts, dx, dy, acc)


IMPLEMENTATIONS = {
    "numpy": {
        "nonmax_suppress": nonmax_suppress_numpy,
        "hysteresis": hysteresis_numpy,
        "cast_votes": cast_votes_numpy,
    },
}
if HAS_NUMBA:
    IMPLEMENTATIONS["numba"] = {
        "nonmax_suppress": nonmax_suppress_numba,
        "hysteresis": hysteresis_numba,
        "cast_votes": cast_votes_numba,
    }

_ACTIVE = "numba" if NUMBA_ENABLED else "numpy"

nonmax_suppress = IMPLEMENTATIONS[_ACTIVE]["nonmax_suppress"]
hysteresis = IMPLEMENTATIONS[_ACTIVE]["hysteresis"]
cast_votes = IMPLEMENTATIONS[_ACTIVE]["cast_votes"]


def active_backend() -> str:
    """Name of the kernel backend in use: ``"numba"`` or ``"numpy"``."""
    return _ACTIVE
