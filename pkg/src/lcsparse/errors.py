"""Shared exception types.

Budget and convergence failures are kept distinct from usage errors so the
command-line layer can map them to its dedicated exit code.
"""

from __future__ import annotations


class BudgetExceeded(RuntimeError):
    """An exact enumeration would exceed its configured work budget."""


class ConvergenceFailure(RuntimeError):
    """An iterative routine exhausted its iteration cap before certifying.

    Carries whatever diagnostic state the caller attached (last iterate,
    residuals) in ``details``.
    """

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details
