from typing import List, Optional


class SicError(Exception):
    """Base class for all errors raised by the sicsim package."""


class ConfigError(SicError):
    pass


class UnknownRayError(SicError, KeyError):
    def __init__(self, ray: object):
        self.ray = ray
        super().__init__(f"Unknown ray: {ray!r}")

    def __str__(self) -> str:
        return self.args[0]


class ImpossibleOutcomeError(SicError):
    """Raised when a collapse onto a zero-probability branch is requested."""

    def __init__(self, ray_label: str, outcome: int, probability: float):
        self.ray_label = ray_label
        self.outcome = outcome
        self.probability = probability
        super().__init__(
            f"Outcome {outcome:+d} on ray {ray_label} has probability {probability:.3e}; cannot collapse."
        )


class InsufficientDataError(SicError):
    """Raised when an estimator needs count cells that are empty."""

    def __init__(self, message: str, missing: Optional[List[str]] = None):
        self.missing = list(missing or [])
        if self.missing:
            shown = ", ".join(self.missing[:10])
            more = f" (+{len(self.missing) - 10} more)" if len(self.missing) > 10 else ""
            message = f"{message}: missing {shown}{more}"
        super().__init__(message)


class CanonicalizationError(SicError):
    def __init__(self, step: int, reason: str):
        self.step = step
        self.reason = reason
        super().__init__(f"Canonicalization failed at step {step}: {reason}")


class FitConvergenceError(SicError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual={residual:.6g})")


class DatasetParseError(SicError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
