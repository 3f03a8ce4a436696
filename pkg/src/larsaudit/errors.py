"""Exception types raised across the package."""


class LarsAuditError(Exception):
    """Base class for every domain error the toolkit raises."""


class InputError(LarsAuditError, ValueError):
    """Malformed or degenerate input (shape mismatch, NaN, constant column...)."""


class RankError(LarsAuditError):
    """A matrix that must be full rank is not, within the configured tolerance."""


class ConvergenceError(LarsAuditError):
    """A numerical target could not be reached (root finding, path length)."""
