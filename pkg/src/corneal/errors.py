"""Exception hierarchy shared by all pipeline stages.

Every failure the library raises deliberately derives from CornealError so
callers (and the CLI) can separate pipeline outcomes from programming bugs.
"""


class CornealError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedFormatError(CornealError):
    """Image file is not a PNG or baseline JPEG."""


class CorruptImageError(CornealError):
    """Image file exists but cannot be decoded."""


class OutOfBoundsError(CornealError):
    """Crop rectangle extends outside the source image."""


class DegeneratePolygonError(CornealError):
    """Polygon has fewer than 3 effective vertices or zero area."""


class DimensionMismatchError(CornealError):
    """Two buffers that must share dimensions do not."""


class InvalidSigmaError(CornealError):
    """Gaussian sigma must be positive."""


class ImageTooSmallError(CornealError):
    """Operation needs a larger image (gradients need at least 3x3)."""


class EmptyEdgeMapError(CornealError):
    """Edge map contains no set pixels."""


class RadiusRangeError(CornealError):
    """Circle search radii are out of range for the image."""


class NoCircleFoundError(CornealError):
    """No sufficiently supported circle in the eye crop."""


class EmptyRegionError(CornealError):
    """Region mask selects no pixels."""


class DegenerateHistogramError(CornealError):
    """All histogram mass sits in a single bin; no threshold splits it."""


class DegenerateLandmarksError(CornealError):
    """Eye landmarks collapse to a zero-area bounding box."""


class AnnotationError(CornealError):
    """Landmark annotation file is missing fields or inconsistent."""


class ManifestError(CornealError):
    """Batch manifest cannot be parsed."""


class SingleClassError(CornealError):
    """ROC/threshold computations need both real and fake records."""


class MalformedCurveError(CornealError):
    """ROC points do not form a curve spanning fpr 0 to 1."""


class ConfigOutOfBoundsError(CornealError):
    """Synthetic scene configuration places geometry outside the image."""
