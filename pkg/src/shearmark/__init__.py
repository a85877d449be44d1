"""Hybrid wavelet/shearlet image watermarking in bidiagonal singular values.

The public entry points are :func:`embed` and :func:`extract`; the
transforms, the bidiagonal SVD, the attack catalog and the metrics are
importable from their own modules.
"""

__version__ = "0.1.0"

from .errors import (CatalogParseError, InvalidConfigError, InvalidInputError,
                     InvalidSelectorError, InvalidSpecError, KeyFormatError,
                     NumericalFailureError, ShearmarkError)
from .watermark import DEFAULT_ALPHA, EmbedConfig, Scheme, WatermarkKey, embed, extract
from .keyfile import read_key, write_key

__all__ = [
    "__version__", "DEFAULT_ALPHA", "EmbedConfig", "Scheme", "WatermarkKey",
    "embed", "extract", "read_key", "write_key",
    "ShearmarkError", "InvalidInputError", "InvalidConfigError", "InvalidSelectorError",
    "InvalidSpecError", "KeyFormatError", "NumericalFailureError", "CatalogParseError",
]
