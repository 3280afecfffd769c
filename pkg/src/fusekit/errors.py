"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: usage/config mistakes exit 1, data
and parse problems exit 2, numeric/degenerate conditions exit 3.
"""


class FusekitError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfigError(FusekitError):
    """A configuration value is outside its legal range (e.g. alpha = 1)."""


class InvalidInputError(FusekitError):
    """Numeric input violates a precondition (non-finite values, etc.)."""


class ShapeError(FusekitError):
    """Matrices or label lists that must agree in shape do not."""


class DegenerateWeightsError(FusekitError):
    """Total classifier entropy is zero, so relative weights are undefined."""


class DataFormatError(FusekitError):
    """Base for dataset parsing and file-format problems."""


class IntegrityError(DataFormatError):
    """Files that must be mutually consistent (X vs y row counts) are not."""


class CalibrationError(DataFormatError):
    """A score row does not lie on the probability simplex within tolerance."""


class SchemaError(DataFormatError):
    """A structured file is missing required declarations."""


class ParseQualityError(DataFormatError):
    """Too large a fraction of a text file failed to parse."""


class StratificationError(FusekitError):
    """A class is too small to be represented in every split partition."""


class UnsupportedSizeError(FusekitError):
    """An operation received a size it cannot handle (non power of two FFT)."""
