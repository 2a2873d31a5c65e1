"""
Exceptions raised by the scattering library. Every class carries the process exit code the CLI
reports when the error escapes a command.
"""

from chiral.config.const import ExitCode


class ChiralError(Exception):
    exit_code = ExitCode.NUMERICAL


class InvalidParameter(ChiralError, ValueError):
    exit_code = ExitCode.CONFIG


class MixedDegeneracy(ChiralError):
    """Some, but not all, detunings are closer than the degeneracy tolerance."""

    exit_code = ExitCode.CONFIG


class DegenerateDetunings(ChiralError):
    exit_code = ExitCode.CONFIG


class NonuniformCoupling(ChiralError):
    exit_code = ExitCode.CONFIG


class GridTooCoarse(ChiralError):
    exit_code = ExitCode.CONFIG


class ContourViolation(ChiralError):
    exit_code = ExitCode.CONFIG


class SingularSeries(ChiralError):
    """The constant coefficient of a truncated series is (numerically) zero."""


class QuadratureNotConverged(ChiralError):
    pass


class TruncationNotConverged(ChiralError):
    pass


class FiniteMuUnsupported(ChiralError):
    exit_code = ExitCode.FINITE_MU


class ResampleLimitExceeded(ChiralError):
    exit_code = ExitCode.RESAMPLE


class ConfigError(InvalidParameter):
    """A run configuration (file, environment or flags) failed validation."""
