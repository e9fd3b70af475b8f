"""Exception hierarchy shared by every module."""


class WeakCtxError(Exception):
    """Base class for all package errors."""


class ValidationError(WeakCtxError, ValueError):
    """Input failed a structural check (norm, hermiticity, projector, ...)."""


class NumericalError(WeakCtxError, RuntimeError):
    """A numerical routine failed to reach its stated accuracy."""


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""


class LPError(NumericalError):
    """The linear program is infeasible, unbounded or stalled."""
