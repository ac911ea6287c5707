"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when user-supplied data violates a precondition."""


class SolverError(RuntimeError):
    """Raised when an iterative solver fails to converge.

    Carries a ``diagnostics`` dict with the solver state at failure.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
