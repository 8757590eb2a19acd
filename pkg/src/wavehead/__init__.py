"""Wavelet classification head over frozen image-encoder embeddings.

Subpackages: wavelet transforms, a minimal dense-network toolkit, the
wavelet/baseline heads, the WEMB embedding file format, threshold-free
metrics, and the command-line harness.
"""

from .errors import (
    ConfigError,
    DataError,
    FormatError,
    ShapeError,
    UndefinedMetricError,
    WaveheadError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "FormatError",
    "ShapeError",
    "UndefinedMetricError",
    "WaveheadError",
    "__version__",
]
