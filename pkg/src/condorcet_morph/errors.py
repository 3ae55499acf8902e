"""Exception hierarchy shared across the package."""


class CondorcetMorphError(Exception):
    """Base class for all package errors."""


class DimensionError(CondorcetMorphError, ValueError):
    """Array shapes or channel counts do not agree."""


class LutLookupError(CondorcetMorphError, KeyError):
    """A color or rank is missing from a look-up table."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InvalidOrderError(CondorcetMorphError, ValueError):
    """A 0/1 matrix does not encode a total order."""


class ProblemTooLargeError(CondorcetMorphError, ValueError):
    """Exhaustive search requested beyond the configured size cap."""


class ConfigError(CondorcetMorphError, ValueError):
    """Invalid user configuration (CLI exit code 2)."""


class DataFormatError(CondorcetMorphError, ValueError):
    """Malformed or unsupported input file (CLI exit code 3)."""


class NumericError(CondorcetMorphError, ArithmeticError):
    """Non-finite values appeared during optimization (CLI exit code 4)."""
