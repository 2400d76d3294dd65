"""Exception hierarchy shared by all tradenet modules."""

from __future__ import annotations


class TradenetError(Exception):
    """Base class for domain-level failures (CLI exit code 1)."""


class InstanceFormatError(TradenetError):
    """Malformed instance file or description (CLI exit code 2)."""


class NetworkValidationError(InstanceFormatError):
    """A network description violates a structural invariant."""

    def __init__(self, issues: list[str]):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class ChoiceFunctionError(TradenetError):
    """A choice-function family was built with inconsistent parameters."""


class GuardExceededError(TradenetError):
    """An exhaustive search was asked to exceed its declared size guard."""


class PreconditionError(TradenetError):
    """An operation's axiom or input precondition does not hold."""

    def __init__(self, message: str, reports=None):
        self.reports = list(reports) if reports else []
        super().__init__(message)


class IterationDiagnosisError(TradenetError):
    """Fixed-point iteration misbehaved; the supplied choice functions are
    almost certainly missing substitutability or consistency properties."""


class StabilityContradictionError(TradenetError):
    """The stability checkers disagreed with the implication diagram.

    On instances with fully substitutable, consistent choice functions this
    indicates a checker bug; on arbitrary instances the diagram itself can
    fail, and the caller should validate axioms first.
    """
