"""Occupation times of alternating renewal processes and reflected Lévy processes."""
__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateLevelError,
    DegenerateVarianceError,
    DivergentTransformError,
    EmptySampleError,
    GridTooCoarseError,
    InfiniteMomentError,
    InvalidRangeError,
    InversionAccuracyWarning,
    NoRootError,
    OcctimeError,
    UnstableModelError,
    UnsupportedKindError,
)

__all__ = [
    "ConfigError", "DegenerateLevelError", "DegenerateVarianceError", "DivergentTransformError",
    "EmptySampleError", "GridTooCoarseError", "InfiniteMomentError", "InvalidRangeError",
    "InversionAccuracyWarning", "NoRootError", "OcctimeError", "UnstableModelError",
    "UnsupportedKindError", "__version__",
]
