"""Exception taxonomy shared by all engines and the CLI."""

from __future__ import annotations


class RodeoError(Exception):
    kind = "error"


class NotHermitian(RodeoError, ValueError):
    kind = "NotHermitian"


class NoConvergence(RodeoError, ArithmeticError):
    kind = "NoConvergence"


class ZeroVector(RodeoError, ValueError):
    kind = "ZeroVector"


class DimensionMismatch(RodeoError, ValueError):
    kind = "DimensionMismatch"


class DimensionUnsupported(RodeoError, ValueError):
    kind = "DimensionUnsupported"


class NonFiniteStrategyOutput(RodeoError, ValueError):
    kind = "NonFiniteStrategyOutput"


class GridMismatch(RodeoError, ValueError):
    kind = "GridMismatch"


class NumericalGuard(RodeoError):
    """Raised when a run cannot continue without biasing the result (exit 3)."""

    kind = "NumericalGuard"


class StepTooLarge(NumericalGuard):
    kind = "StepTooLarge"


class ClassLimit(NumericalGuard):
    """The class ensemble grew past its cap (jump targets vary continuously)."""

    kind = "ClassLimit"


class NegativeRate(NumericalGuard):
    kind = "NegativeRate"

    def __init__(self, index, rate, time=None, stream_id=None):
        self.index = int(index)
        self.rate = float(rate)
        self.time = time
        self.stream_id = stream_id
        where = "" if time is None else f" at t={time:.6g}"
        who = "" if stream_id is None else f" (trajectory {stream_id})"
        super().__init__(
            f"negative jump rate {self.rate:.6g} on eigenindex {self.index}{where}{who}; "
            "use the reverse-jump engine (nmqj mode)"
        )


class Breakdown(RodeoError):
    """The ensemble needs a reverse jump into a state that carries no weight."""

    kind = "Breakdown"

    def __init__(self, event):
        self.event = event
        super().__init__(
            f"unraveling breaks down at t={event.time:.6g}: class {event.source_class} "
            f"has rate {event.rate:.6g} toward an unpopulated state"
        )


class SchemaError(RodeoError, ValueError):
    kind = "SchemaError"

    def __init__(self, errors):
        # errors: list of (key path, message)
        self.errors = list(errors)
        lines = [f"{path or '<root>'}: {msg}" for path, msg in self.errors]
        super().__init__("invalid config:\n  " + "\n  ".join(lines))
