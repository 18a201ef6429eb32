"""
Common schemas shared by the command line outputs.
"""
from datetime import datetime, timezone
from typing import List, Optional

from pydantic import BaseModel, Field

from fsikit.core.exceptions import ConfigError, FsiError


class ErrorResponse(BaseModel):
    """
    Standard error record.

    Printed by the CLI in ``--json`` mode so scripted callers get the same
    fields as the exit code.
    """
    detail: str = Field(
        ...,
        description="Human-readable error message",
        examples=["No unique crossover inside the search bracket"],
    )
    error_code: Optional[str] = Field(
        None,
        description="Machine-readable error code",
        examples=["CROSSOVER_OUT_OF_RANGE"],
    )
    exit_code: int = Field(..., description="Process exit status")
    errors: Optional[List[str]] = Field(None, description="Field-level messages for config failures")
    timestamp: str = Field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat(),
        description="Error timestamp",
    )

    @classmethod
    def from_exception(cls, exc: FsiError) -> "ErrorResponse":
        return cls(
            detail=exc.detail,
            error_code=exc.error_code,
            exit_code=exc.exit_code,
            errors=exc.errors if isinstance(exc, ConfigError) else None,
        )
