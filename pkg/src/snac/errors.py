"""Exception types shared across the toolkit."""

from __future__ import annotations


class SnacError(Exception):
    """Base class for all toolkit-specific errors."""


class SchemaError(SnacError):
    """A file did not conform to its JSON schema."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path:
            where = f" [{path}" + (f":{line}]" if line is not None else "]")
        super().__init__(message + where)


class UndefinedAgreementError(SnacError):
    """Agreement is undefined (e.g. zero expected disagreement or empty denominator)."""


class UndefinedDistributionError(SnacError):
    """An error distribution was requested over zero annotations."""


class UndefinedCorrelationError(SnacError):
    """Pearson correlation is undefined (zero variance or too few points)."""


class CompletenessError(SnacError):
    """Required records are missing; carries the missing identifiers."""

    def __init__(self, message: str, missing=()):
        self.missing = list(missing)
        if self.missing:
            message = f"{message}: {self.missing}"
        super().__init__(message)


class SingleClassError(SnacError):
    """An operation requiring both classes saw only one."""


class UnachievablePrecisionError(SnacError):
    """No decision threshold reaches the requested precision."""

    def __init__(self, target: float, max_achievable: float):
        self.target = target
        self.max_achievable = max_achievable
        super().__init__(
            f"no threshold reaches precision {target}; maximum achievable is {max_achievable:.4f}"
        )


class LeakageError(SnacError):
    """A held-out annotator leaked into the gold reference."""
