"""Exception hierarchy shared across the package.

The CLI maps ConfigError to exit code 2 and every other SecallocError
(and unexpected numerical trouble) to exit code 3.
"""


class SecallocError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SecallocError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(InputError):
    """Input is structurally valid but numerically degenerate (e.g. rank 0)."""


class DecompositionError(SecallocError):
    """A matrix factorization produced factors that violate its contract."""


class NumericalError(SecallocError):
    """An iterative numerical procedure failed to converge or went non-finite."""


class ConfigError(SecallocError):
    """Config file could not be parsed or failed validation."""
