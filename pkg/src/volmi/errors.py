"""Semantic exception hierarchy shared across the package."""


class VolmiError(Exception):
    """Base class for all package errors."""


class ConfigurationError(VolmiError, ValueError):
    """Malformed or inconsistent input specification (bad JSON, unknown kind,
    invalid parameter combination).  CLI maps this to exit code 2."""


class PreconditionError(VolmiError, ValueError):
    """A documented operation precondition was violated (dimension mismatch,
    degenerate matrix, too few samples, ...).  CLI maps this to exit code 3."""
