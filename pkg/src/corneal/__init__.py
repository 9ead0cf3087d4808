"""Forensic scoring of corneal specular highlight consistency.

Extracts the specular highlights on both corneas of a portrait, registers
them by translation, and scores their IoU. Matching highlights point to a
camera-captured face; mismatched ones are a synthesis artifact.
"""

from .edges import CannyParams, GradientField, canny, canny_stages, gaussian_blur, sobel_gradients
from .errors import CornealError
from .evaluation import (
    ManifestRow,
    RocPoint,
    ScoreRecord,
    auc,
    batch_evaluate,
    mann_whitney_auc,
    pick_threshold,
    read_manifest,
    roc_curve,
    score_histogram,
)
from .hough import Circle, CircleCandidate, HoughParams, detect_limbus, hough_circles
from .imaging import (
    Rect,
    crop,
    fill_polygon,
    load_image,
    mask_count,
    mask_intersect,
    mask_union,
    save_image,
    to_grayscale,
)
from .kernels import active_backend
from .pipeline import (
    EyeAnalysis,
    EyeLandmarks,
    FaceAnnotation,
    FaceReport,
    PairScore,
    PipelineParams,
    align_and_score,
    analyze_eye,
    analyze_face,
    eye_crop_box,
    load_annotation,
)
from .synthgen import EyeSceneConfig, GroundTruth, make_corpus, render_eye_pair
from .threshold import Histogram256, ThresholdResult, binarize_above, histogram256, yen_threshold

__version__ = "0.1.0"

__all__ = [
    "CannyParams", "GradientField", "canny", "canny_stages", "gaussian_blur",
    "sobel_gradients", "CornealError", "ManifestRow", "RocPoint", "ScoreRecord",
    "auc", "batch_evaluate", "mann_whitney_auc", "pick_threshold", "read_manifest",
    "roc_curve", "score_histogram", "Circle", "CircleCandidate", "HoughParams",
    "detect_limbus", "hough_circles", "Rect", "crop", "fill_polygon", "load_image",
    "mask_count", "mask_intersect", "mask_union", "save_image", "to_grayscale",
    "active_backend", "EyeAnalysis", "EyeLandmarks", "FaceAnnotation", "FaceReport",
    "PairScore", "PipelineParams", "align_and_score", "analyze_eye", "analyze_face",
    "eye_crop_box", "load_annotation", "EyeSceneConfig", "GroundTruth", "make_corpus",
    "render_eye_pair", "Histogram256", "ThresholdResult", "binarize_above",
    "histogram256", "yen_threshold", "__version__",
]
