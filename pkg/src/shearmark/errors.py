"""Exception hierarchy shared by every shearmark module."""


class ShearmarkError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ShearmarkError, ValueError):
    """An array argument has the wrong shape, dtype or contents."""


class InvalidConfigError(ShearmarkError, ValueError):
    """A configuration value is out of range or inconsistent."""


class InvalidSelectorError(ShearmarkError, ValueError):
    """A subband selector does not resolve to a plane of the system."""


class NumericalFailureError(ShearmarkError, ArithmeticError):
    """An iterative numerical method failed to converge."""


class KeyFormatError(ShearmarkError, ValueError):
    """A watermark key file is malformed, truncated or corrupt."""


class InvalidSpecError(ShearmarkError, ValueError):
    """An attack specification has invalid parameters."""


class CatalogParseError(ShearmarkError, ValueError):
    """An attack catalog line could not be parsed.

    Attributes
    ----------
    lineno : int
        1-based line number of the offending line.
    """

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno
