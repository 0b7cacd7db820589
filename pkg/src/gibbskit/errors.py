"""Exception types shared across the package.

The CLI maps ValidationError to exit code 2 and NumericalError to exit code 3.
"""


class ValidationError(ValueError):
    """Malformed input: bad JSON, dimension mismatch, out-of-range parameter."""


class NumericalError(RuntimeError):
    """Numerically infeasible state: negative probabilities, non-convergence."""
