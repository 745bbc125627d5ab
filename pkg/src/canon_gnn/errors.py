"""Exception types shared across the package.

Every error raised by library code derives from CanonGnnError so callers
(and the CLI exit-code mapping) can catch one base class.
"""


class CanonGnnError(Exception):
    """Base class for all library errors."""


class DimensionError(CanonGnnError, ValueError):
    """Array or graph dimensions do not line up."""


class WidthError(CanonGnnError, ValueError):
    """A feature width is too small for the values it must encode."""


class ParseError(CanonGnnError, ValueError):
    """Malformed input file; message carries file/line/field context."""


class ValidationError(CanonGnnError, ValueError):
    """A domain invariant is violated (symmetry, duplicate labels, ...)."""


class SizeError(CanonGnnError, ValueError):
    """Input exceeds a configured size limit."""


class LabelingError(CanonGnnError, ValueError):
    """Node labels required but missing or malformed."""


class UniverseError(CanonGnnError, ValueError):
    """A label does not belong to the label universe in use."""


class ParameterError(CanonGnnError, ValueError):
    """Generator or algorithm parameters outside the supported range."""


class ConfigurationError(CanonGnnError, ValueError):
    """Inconsistent run or model configuration."""


class NumericError(CanonGnnError, ArithmeticError):
    """Non-finite values encountered during numeric computation."""


class GenerationError(CanonGnnError, RuntimeError):
    """Randomized construction failed within its retry budget."""


class UsageError(CanonGnnError):
    """Command line misuse; mapped to exit code 64."""
