"""Exception taxonomy shared across the package.

Each class maps onto one CLI exit code (see ``svbeam.cli``): configuration
problems exit 2, search-budget refusals exit 3, file/parse problems exit 4,
and numerical failures exit 5.
"""

from __future__ import annotations

__all__ = [
    "ConfigurationError",
    "BudgetExceededError",
    "ChannelFormatError",
    "NumericalError",
]


class ConfigurationError(ValueError):
    """Invalid parameter combination (dimensions, ranges, unknown names)."""


class BudgetExceededError(RuntimeError):
    """A requested search would exceed the combination budget.

    Raised *before* any work is done so a mis-sized experiment fails loudly
    instead of hanging.  The message states the required count and the cap.
    """


class ChannelFormatError(ValueError):
    """A channel file or manifest could not be parsed or failed validation."""


class NumericalError(ArithmeticError):
    """A numerical routine failed (SVD non-convergence, non-finite values)."""
