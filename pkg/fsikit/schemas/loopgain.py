"""
Loop gain records.

T(s) = gain * prod(1 + s/w_zi) / (s**m * prod(1 + s/w_pj)) with real positive
corner frequencies (rad/s).
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class TermKind(str, Enum):
    ORIGIN_1 = "origin_1"      # c/s
    ORIGIN_2 = "origin_2"      # c/s**2
    REAL_POLE = "real_pole"    # c/(s + pole)


class PartialFractionTerm(BaseModel):
    kind: TermKind
    coefficient: float
    pole: Optional[float] = Field(None, description="Pole magnitude for REAL_POLE terms (rad/s)")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_pole(self) -> "PartialFractionTerm":
        if self.kind is TermKind.REAL_POLE and self.pole is None:
            raise ValueError("REAL_POLE term needs a pole")
        if self.kind is not TermKind.REAL_POLE and self.pole is not None:
            raise ValueError("Origin terms carry no pole")
        return self

    def scaled(self, factor: float) -> "PartialFractionTerm":
        return self.model_copy(update={"coefficient": self.coefficient * factor})


class RationalLoopGain(BaseModel):
    """Loop gain in factored (Bode) form."""
    gain: float = Field(..., description="High-level gain factor")
    zeros: List[float] = Field(default_factory=list, description="Zero corner frequencies (rad/s)")
    poles: List[float] = Field(default_factory=list, description="Nonzero pole corner frequencies (rad/s)")
    origin_order: int = Field(0, ge=0, le=3, description="Number of poles at the origin")

    model_config = ConfigDict(frozen=True)

    @field_validator("zeros", "poles")
    @classmethod
    def validate_corners(cls, v: List[float]) -> List[float]:
        if any(not w > 0 for w in v):
            raise ValueError("Corner frequencies must be real and strictly positive")
        return v

    @field_validator("poles")
    @classmethod
    def validate_distinct_poles(cls, v: List[float]) -> List[float]:
        if len(set(v)) != len(v):
            raise ValueError("Repeated poles are not supported")
        return v

    @model_validator(mode="after")
    def check_degree(self) -> "RationalLoopGain":
        if len(self.zeros) > len(self.poles) + self.origin_order:
            raise ValueError("Numerator degree exceeds denominator degree")
        return self


class LoopGainSum(BaseModel):
    """Sum of factored loop gains, e.g. current path plus voltage path."""
    parts: List[RationalLoopGain] = Field(..., min_length=1)

    model_config = ConfigDict(frozen=True)
