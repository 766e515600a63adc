"""Exception hierarchy and warning types for tscontrol.

The three error families map onto distinct CLI exit codes: configuration
problems (2), data problems (3), and numerical problems (4). I/O failures
use the builtin ``OSError`` and map to exit code 5.
"""


class TscError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TscError):
    """Invalid configuration: unknown keys, bad enum values, bad field types."""


class DataError(TscError):
    """Input data violates a structural requirement."""


class DimensionMismatchError(DataError):
    """Matrix or vector shapes are inconsistent with each other."""


class InvalidT0Error(DataError):
    """Treatment time outside the valid range [1, T-1]."""


class NonBinaryValueError(DataError):
    """A binary-outcome panel contains a value other than 0 or 1."""


class OutOfBoundsError(DataError):
    """Declared outcome bounds are violated or degenerate."""


class NoControlsError(DataError):
    """No control units are available."""


class LengthMismatchError(DataError):
    """Paired vectors have different lengths."""


class TooFewControlsError(DataError):
    """Not enough control units for the requested fold split."""


class EmptyInputError(DataError):
    """An operation received an empty collection where data is required."""


class PanelParseError(DataError):
    """A panel CSV file could not be parsed."""


class RaggedPanelError(PanelParseError):
    """The panel is incomplete: some (unit, time) cells are missing."""


class CovariateNotConstantError(PanelParseError):
    """A long-format covariate column varies within a unit."""


class NumericError(TscError):
    """Numerical failure: non-finite inputs, invalid brackets, degenerate scales."""


class NonFiniteInputError(NumericError):
    """An input array contains NaN or infinity."""


class InvalidBracketError(NumericError):
    """The root-finding bracket is empty or inverted."""


class DegenerateRangeError(NumericError):
    """A min-max normalization hit a zero-width range."""


class SingularDesignWarning(UserWarning):
    """Rank-deficient unregularized design; the minimum-norm solution was used."""
