"""Exception types shared across the engine.

Every domain failure raises a subclass of PilotError so that the CLI and the
HTTP service can map errors to exit codes / status codes uniformly.
"""

from __future__ import annotations


class PilotError(Exception):
    """Base class for all domain errors."""

    code = "error"


class UnknownLabelError(PilotError):
    """A label (entity, datatype, purpose, ...) is not declared in its hierarchy."""

    code = "unknown-label"

    def __init__(self, label: str, kind: str = "label", span: tuple[int, int] | None = None):
        self.label = label
        self.kind = kind
        self.span = span
        super().__init__(f"unknown {kind}: {label!r}")


class IncomparableError(PilotError):
    """Two labels have no order relation, so a join cannot be formed."""

    code = "incomparable"

    def __init__(self, a: str, b: str, kind: str = "label"):
        self.a = a
        self.b = b
        self.kind = kind
        super().__init__(f"incomparable {kind}s: {a!r} and {b!r}")


class UnknownSymbolError(PilotError):
    """A condition uses a function or predicate with no registered interpretation."""

    code = "unknown-symbol"

    def __init__(self, symbol: str, detail: str = ""):
        self.symbol = symbol
        msg = f"no interpretation registered for {symbol!r}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EvaluationError(PilotError):
    """A registered predicate/function was applied to values it does not cover."""

    code = "evaluation"


class PolicySyntaxError(PilotError):
    """Concrete policy text does not match the grammar; carries a source span."""

    code = "syntax"

    def __init__(self, message: str, span: tuple[int, int]):
        self.span = span
        super().__init__(f"{message} (at {span[0]}..{span[1]})")


class ValidationError(PilotError):
    """A scenario or policy violates a structural invariant."""

    code = "validation"

    def __init__(self, message: str, violations: list[str] | None = None):
        self.violations = violations or [message]
        super().__init__(message)


class NotEnabledError(PilotError):
    """An event was applied in a state where it is not enabled."""

    code = "not-enabled"


class StateBudgetExceededError(PilotError):
    """Exploration hit the configured state cap before reaching a fixpoint."""

    code = "state-budget-exceeded"

    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"exploration exceeded the state budget of {budget}")


class StoreError(PilotError):
    """A persistence operation failed (I/O, missing id, corrupt file)."""

    code = "store"
