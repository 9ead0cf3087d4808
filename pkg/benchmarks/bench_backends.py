#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot kernels (non-maximum suppression, hysteresis growth,
accumulator voting) and a full two-eye analysis on a rendered scene, then
checks that both backends produce identical outputs.

Usage:
    python benchmarks/bench_backends.py [--iters N] [--radius R]

The active backend for normal package use is chosen at import time; set
CORNEAL_NO_NUMBA=1 to run the package itself on the numpy path.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from corneal import kernels
from corneal.edges import gaussian_blur, quantize_directions, sobel_gradients
from corneal.hough import DIRECTION_BINS, _build_tables
from corneal.pipeline import PipelineParams, analyze_face
from corneal.synthgen import EyeSceneConfig, render_eye_pair, scene_for_index


def time_fn(fn, iters):
    best = math.inf
    for _ in range(iters):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_eye_inputs(radius):
    """Render one noisy eye crop and precompute its gradient field."""
    from corneal.synthgen import EyeGeometry, HighlightBlob, _paint_eye

    w = h = int(5.7 * radius)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.full((h, w), 172.0)
    eye = EyeGeometry(center=(w // 2, h // 2), radius=radius)
    blobs = (HighlightBlob(offset=(-0.2 * radius, -0.1 * radius), size=0.18 * radius),
             HighlightBlob(offset=(0.25 * radius, 0.2 * radius), size=0.15 * radius))
    _paint_eye(img, xx, yy, eye, blobs, 0.1)
    rng = np.random.default_rng(5)
    img = np.clip(np.rint(img + rng.normal(0, 4.0, img.shape)), 0, 255).astype(np.uint8)
    blurred = gaussian_blur(img, 1.4)
    grads = sobel_gradients(blurred)
    dbin = quantize_directions(grads.direction)
    return img, grads, dbin


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=5)
    ap.add_argument("--radius", type=int, default=40)
    args = ap.parse_args()

    if "numba" not in kernels.IMPLEMENTATIONS:
        print("numba unavailable; nothing to compare")
        return

    img, grads, dbin = make_eye_inputs(args.radius)
    mag = grads.magnitude
    h, w = mag.shape
    print(f"eye crop {w}x{h}, radius {args.radius}, backend in use: "
          f"{kernels.active_backend()}")

    npk = kernels.IMPLEMENTATIONS["numpy"]
    nbk = kernels.IMPLEMENTATIONS["numba"]

    # warm up the JIT before timing
    sup = nbk["nonmax_suppress"](mag, dbin)
    strong = sup >= 0.25 * mag.max()
    weak = (sup >= 0.1 * mag.max()) & (sup > 0)
    nbk["hysteresis"](strong, weak)

    ys, xs = np.nonzero(weak)
    ys = ys.astype(np.int32)
    xs = xs.astype(np.int32)
    theta = grads.direction[ys, xs] % (2 * math.pi)
    bins = (np.floor(theta / (2 * math.pi) * DIRECTION_BINS).astype(np.int32)
            % DIRECTION_BINS)
    r_lo, r_hi = max(3, int(0.15 * w)), int(0.5 * w)
    radii = np.arange(r_lo, r_hi + 1)
    dx, dy, starts = _build_tables(radii, gated=True)

    def vote_with(impl):
        acc = np.zeros((len(radii), h, w), np.int32)
        impl["cast_votes"](ys, xs, bins, starts, dx, dy, acc)
        return acc

    vote_with(nbk)  # JIT warmup for the vote kernel

    rows = []
    rows.append(("nonmax_suppress",
                 time_fn(lambda: npk["nonmax_suppress"](mag, dbin), args.iters),
                 time_fn(lambda: nbk["nonmax_suppress"](mag, dbin), args.iters)))
    rows.append(("hysteresis",
                 time_fn(lambda: npk["hysteresis"](strong, weak), args.iters),
                 time_fn(lambda: nbk["hysteresis"](strong, weak), args.iters)))
    rows.append(("cast_votes",
                 time_fn(lambda: vote_with(npk), args.iters),
                 time_fn(lambda: vote_with(nbk), args.iters)))

    print(f"\n{'kernel':<18}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}")
    print("-" * 51)
    for name, t_np, t_nb in rows:
        print(f"{name:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}{t_np / t_nb:>8.1f}x")

    # agreement between the two paths
    agree = []
    agree.append(np.array_equal(npk["nonmax_suppress"](mag, dbin),
                                nbk["nonmax_suppress"](mag, dbin)))
    agree.append(np.array_equal(npk["hysteresis"](strong, weak),
                                nbk["hysteresis"](strong, weak)))
    agree.append(np.array_equal(vote_with(npk), vote_with(nbk)))
    print("\nbackend agreement:", "identical" if all(agree) else f"MISMATCH {agree}")

    # end-to-end single face, active backend
    cfg = scene_for_index(EyeSceneConfig(noise_sigma=2.0), seed=5, index=0,
                          consistent=True)
    rgb, ann, _ = render_eye_pair(cfg)
    analyze_face(rgb, ann, PipelineParams())
    t = time_fn(lambda: analyze_face(rgb, ann, PipelineParams()), args.iters)
    print(f"full two-eye analysis ({kernels.active_backend()}): {t * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
