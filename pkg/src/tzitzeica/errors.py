"""Exception hierarchy shared by all pipeline stages."""

from __future__ import annotations


class TzitzeicaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(TzitzeicaError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigError(TzitzeicaError):
    """A configuration file or value is invalid.

    Parameters
    ----------
    message : str
        Human readable description.
    key : str, optional
        Dotted configuration key at fault.
    line : int, optional
        1-based line number in the configuration file.
    """

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key '{key}'")
        text = f"{': '.join(prefix)}: {message}" if prefix else message
        super().__init__(text)
        self.key = key
        self.line = line


class NumericalError(TzitzeicaError):
    """Base class for failures of a numerical stage."""


class IntegrationError(NumericalError):
    """The Jost ODE integration failed for one or more spectral parameters."""

    def __init__(self, message: str, lambdas=()):
        super().__init__(message)
        self.lambdas = list(lambdas)


class SolitonSuspicionError(NumericalError):
    """|s11| fell below the soliton tolerance, so the data may carry solitons."""

    def __init__(self, message: str, lambdas=()):
        super().__init__(message)
        self.lambdas = list(lambdas)


class StabilityError(NumericalError):
    """The PDE state became non-finite or exceeded the blow-up guard."""


class ValidityError(NumericalError):
    """The asymptotic amplitude is too large for the logarithm to be defined."""


class FitError(NumericalError):
    """The error-decay fit is ill-posed."""


class StageError(NumericalError):
    """A harness stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
