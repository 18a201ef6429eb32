"""
Custom exceptions for the toolkit.

Library code raises these; the CLI maps ``exit_code`` to the process status.
"""
from typing import List, Optional, Sequence


class FsiError(Exception):
    """Base exception class for analysis errors."""

    exit_code: int = 1

    def __init__(self, detail: str, error_code: Optional[str] = None):
        super().__init__(detail)
        self.detail = detail
        self.error_code = error_code


class ConfigError(FsiError):
    """Raised when a converter configuration is invalid."""

    exit_code = 2

    def __init__(self, detail: str, field: Optional[str] = None, errors: Optional[List[str]] = None):
        super().__init__(detail=detail, error_code="CONFIG_ERROR")
        self.field = field
        self.errors = errors or [detail]


class DomainError(FsiError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""

    exit_code = 2

    def __init__(self, detail: str, field: Optional[str] = None):
        super().__init__(detail=detail, error_code="DOMAIN_ERROR")
        self.field = field


class UnsupportedTopologyError(FsiError):
    """Raised when an operation is not defined for a topology or scheme."""

    exit_code = 2

    def __init__(self, detail: str):
        super().__init__(detail=detail, error_code="UNSUPPORTED_TOPOLOGY")


class CoverageError(FsiError):
    """Raised when a loop gain has no partial-fraction form the F-transform covers."""

    exit_code = 3

    def __init__(self, detail: str):
        super().__init__(detail=detail, error_code="LOOP_GAIN_OUT_OF_COVERAGE")


class CrossoverError(FsiError):
    """Raised when |T(jw)| = 1 has no unique root inside the search bracket."""

    exit_code = 3

    def __init__(self, detail: str = "No unique crossover inside the search bracket"):
        super().__init__(detail=detail, error_code="CROSSOVER_OUT_OF_RANGE")


class ConvergenceError(FsiError):
    """Raised when the periodic-orbit Newton iteration fails."""

    exit_code = 3

    def __init__(self, detail: str, residuals: Sequence[float] = ()):
        super().__init__(detail=detail, error_code="NEWTON_DID_NOT_CONVERGE")
        self.residuals = list(residuals)


class DCMError(FsiError):
    """Raised when the inductor current reaches zero (discontinuous conduction)."""

    exit_code = 3

    def __init__(self, detail: str = "Inductor current reached zero; converter left CCM"):
        super().__init__(detail=detail, error_code="DISCONTINUOUS_CONDUCTION")
