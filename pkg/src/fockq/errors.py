"""
Exceptions raised by fockq.

Everything derives from :class:`FockqError` so that callers (and the sweep
worker, which records per-point failures) can catch the package's own
failures without swallowing programming errors.
"""


class FockqError(Exception):
    pass


class SymbolEvaluationError(FockqError):
    """Raised when a sampled radial profile fails to evaluate."""


class QuadratureConvergenceError(FockqError):
    """
    Raised when a quadrature estimate can't be trusted.

    Parameters
    ----------
    message: str
        Human readable description
    estimate, refined: complex, optional
        The two estimates that disagree (the second uses the doubled order)
    """

    def __init__(self, message, estimate=None, refined=None):
        super().__init__(message)
        self.estimate = estimate
        self.refined = refined


class TruncationError(FockqError):
    """
    Raised when a finite Fock section is too small for the requested check.

    The ``suggested_dim`` attribute holds a dimension that would satisfy the
    tolerance (when one could be computed).
    """

    def __init__(self, message, indicator=None, suggested_dim=None):
        super().__init__(message)
        self.indicator = indicator
        self.suggested_dim = suggested_dim


class PowerIterationError(FockqError):
    def __init__(self, message, previous, last):
        super().__init__(f"{message} (last two iterates: {previous!r}, {last!r})")
        self.previous = previous
        self.last = last


class SymbolSyntaxError(FockqError, ValueError):
    """
    Syntax error in a symbol expression.

    ``str(err)`` renders the expression with a caret under the offending
    column.
    """

    def __init__(self, message, expr, pos):
        self.message = message
        self.expr = expr
        self.pos = pos
        super().__init__(self._render())

    def _render(self):
        return f"{self.message} at column {self.pos}\n  {self.expr}\n  {' ' * self.pos}^"


class ScenarioAssertionError(FockqError):
    """
    A named check inside a scenario failed.

    ``record`` is a plain dict (scenario, check, observed, expected,
    tolerance) that is written verbatim into the failure report.
    """

    def __init__(self, record):
        self.record = dict(record)
        super().__init__(
            f"{record.get('scenario')}: check {record.get('check')!r} failed "
            f"(observed {record.get('observed')!r}, expected {record.get('expected')!r})"
        )
