"""Command-line interface: analyze, batch, roc, synth.

stdout carries machine-parseable key=value lines; diagnostics go to stderr.
Exit codes: 0 success, 2 I/O or manifest problems, 3 no circle found,
4 bad annotation, 5 single-class ROC input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import evaluation, synthgen
from .edges import CannyParams
from .errors import (
    AnnotationError,
    CornealError,
    ManifestError,
    NoCircleFoundError,
    SingleClassError,
)
from .imaging import load_image, save_image
from .overlay import render_overlay
from .pipeline import PipelineParams, analyze_face, load_annotation

EXIT_IO = 2
EXIT_NO_CIRCLE = 3
EXIT_ANNOTATION = 4
EXIT_SINGLE_CLASS = 5


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=1.4,
                   help="Gaussian blur sigma for edge detection (default 1.4)")
    p.add_argument("--canny-low", type=float, default=0.1,
                   help="weak-edge threshold, fraction of max gradient (default 0.1)")
    p.add_argument("--canny-high", type=float, default=0.25,
                   help="strong-edge threshold, fraction of max gradient (default 0.25)")
    p.add_argument("--crop-margin", type=float, default=0.4,
                   help="eye-crop margin as a fraction of the landmark box (default 0.4)")
    p.add_argument("--align-search", type=int, default=3,
                   help="half-width of the IoU-maximizing translation search (default 3)")
    p.add_argument("--rescale-right", action="store_true",
                   help="scale the right highlight mask by the limbus radius ratio")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker threads for batch scoring (default 1)")


def _params(args) -> PipelineParams:
    return PipelineParams(
        canny=CannyParams(sigma=args.sigma, low=args.canny_low, high=args.canny_high),
        crop_margin=args.crop_margin,
        align_search=args.align_search,
        rescale_right=args.rescale_right,
    )


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def cmd_analyze(args) -> int:
    try:
        img = load_image(args.image)
    except (FileNotFoundError, CornealError) as e:
        return _fail(EXIT_IO, f"error: {e}")
    try:
        ann = load_annotation(args.landmarks, face_index=args.face)
    except FileNotFoundError as e:
        return _fail(EXIT_IO, f"error: {e}")
    except AnnotationError as e:
        return _fail(EXIT_ANNOTATION, f"error: {e}")
    try:
        report = analyze_face(img, ann, _params(args))
    except ValueError as e:
        return _fail(EXIT_IO, f"error: {e}")
    if report.error is not None:
        code = EXIT_ANNOTATION if "annotation" in report.error or \
            "landmarks" in report.error else EXIT_NO_CIRCLE
        return _fail(code, f"error: eye analysis failed ({report.error})")
    if args.overlay:
        try:
            save_image(render_overlay(img, report), args.overlay)
        except OSError as e:
            return _fail(EXIT_IO, f"error: cannot write overlay: {e}")
    print(f"iou={report.score.iou:.6f} status={report.score.status}")
    return 0


def cmd_batch(args) -> int:
    try:
        rows = evaluation.read_manifest(args.manifest)
    except ManifestError as e:
        return _fail(EXIT_IO, f"error: {e}")
    records = evaluation.batch_evaluate(rows, _params(args), jobs=args.jobs)
    try:
        evaluation.write_records(records, args.out)
    except OSError as e:
        return _fail(EXIT_IO, f"error: cannot write records: {e}")
    for label in ("real", "fake", "unknown"):
        of_label = [r for r in records if r.label == label]
        if not of_label:
            continue
        ok = sum(1 for r in of_label if r.scored)
        print(f"label={label} scored={ok} failed={len(of_label) - ok}")
    print(f"records={len(records)} out={args.out}")
    return 0


def cmd_roc(args) -> int:
    records = []
    for path in args.records:
        try:
            records.extend(evaluation.read_records(path))
        except ManifestError as e:
            return _fail(EXIT_IO, f"error: {e}")
    try:
        points = evaluation.roc_curve(records)
    except SingleClassError as e:
        return _fail(EXIT_SINGLE_CLASS, f"error: {e}")
    auc_value = evaluation.auc(points)
    try:
        evaluation.write_roc(points, auc_value, args.out)
        if args.hist:
            edges, c_real, c_fake = evaluation.score_histogram(records, args.bins)
            evaluation.write_histogram(edges, c_real, c_fake, args.hist)
            if args.hist_svg:
                evaluation.render_histogram_svg(edges, c_real, c_fake, args.hist_svg)
        if args.svg:
            evaluation.render_roc_svg(points, auc_value, args.svg)
    except OSError as e:
        return _fail(EXIT_IO, f"error: cannot write output: {e}")
    excluded = sum(1 for r in records if not r.scored)
    print(f"auc={auc_value:.6f}")
    print(f"scored={len(records) - excluded} excluded_failed={excluded}")
    return 0


def cmd_synth(args) -> int:
    base = synthgen.EyeSceneConfig(
        width=args.image_width, height=args.image_height,
        noise_sigma=args.noise, edge_softness=args.edge_softness,
    )
    try:
        manifest = synthgen.make_corpus(args.n, base, args.seed, args.out)
    except (OSError, CornealError, ValueError) as e:
        return _fail(EXIT_IO, f"error: {e}")
    print(f"manifest={manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corneal",
        description="Score the consistency of corneal specular highlights "
                    "between the two eyes of a face image.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="score one image against its landmark sidecar")
    p.add_argument("image", help="PNG or JPEG face image")
    p.add_argument("landmarks", help="landmark sidecar JSON")
    p.add_argument("--face", type=int, default=0, help="face entry index (default 0)")
    p.add_argument("--overlay", help="write a diagnostic overlay PNG here")
    _add_shared_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("batch", help="score every row of a manifest CSV")
    p.add_argument("manifest", help="CSV with header image,landmarks,label")
    p.add_argument("--out", required=True, help="records CSV output path")
    _add_shared_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("roc", help="ROC curve and AUC from records CSVs")
    p.add_argument("records", nargs="+", help="records CSV(s) from `batch`")
    p.add_argument("--out", required=True, help="ROC CSV output path")
    p.add_argument("--hist", help="also write a score-histogram CSV here")
    p.add_argument("--bins", type=int, default=20, help="histogram bins (default 20)")
    p.add_argument("--svg", help="write an SVG rendering of the ROC curve")
    p.add_argument("--hist-svg", help="write an SVG rendering of the histogram")
    p.set_defaults(func=cmd_roc)

    p = sub.add_parser("synth", help="generate a synthetic labelled corpus")
    p.add_argument("--n", type=int, required=True, help="scenes per class")
    p.add_argument("--seed", type=int, default=0, help="corpus seed (default 0)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--noise", type=float, default=2.0,
                   help="additive Gaussian noise sigma (default 2)")
    p.add_argument("--edge-softness", type=float, default=0.0,
                   help="anti-alias the limbus edge (0 = hard, default)")
    p.add_argument("--image-width", type=int, default=256)
    p.add_argument("--image-height", type=int, default=128)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
