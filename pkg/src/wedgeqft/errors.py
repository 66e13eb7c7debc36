"""Exception types shared across the package."""


class WedgeQFTError(Exception):
    """Base class for all package-specific errors."""


class ModelError(WedgeQFTError, ValueError):
    """Invalid scattering-function data (bad zeros, signs, parameters)."""


class PoleProximityError(WedgeQFTError, ValueError):
    """Evaluation point too close to a pole of the scattering function."""


class StripError(WedgeQFTError, ValueError):
    """Argument outside the admissible analyticity strip."""


class GridError(WedgeQFTError, ValueError):
    """Inconsistent rapidity-grid data or grid mismatch between operands."""


class TruncationCapError(WedgeQFTError, ValueError):
    """Requested particle number exceeds the configured truncation cap."""


class SupportOverflowError(WedgeQFTError, ValueError):
    """A boost would shift non-negligible amplitude off the rapidity grid."""


class QuadratureOverflowError(WedgeQFTError, ValueError):
    """Complex quadrature exponent exceeds the double-precision budget."""


class TailError(WedgeQFTError, ValueError):
    """Integrand tail beyond the quadrature window is not negligible."""


class OrderingError(WedgeQFTError, ValueError):
    """Wave-packet supports are not strictly ordered / separated."""


class ConvergenceError(WedgeQFTError, RuntimeError):
    """A numerical procedure failed to converge within its budget."""


class ConfigError(WedgeQFTError, ValueError):
    """Config file cannot be parsed or validated.

    Carries the file path and (1-based) line number of the offending entry
    when these are known, so CLI errors stay line-anchored.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
