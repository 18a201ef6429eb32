"""
Domain validation utilities shared by the services.
"""
import math
from typing import Union

import numpy as np

from fsikit.core.exceptions import DomainError

ArrayLike = Union[float, np.ndarray]


class CommonValidators:
    """Common validation utilities."""

    @staticmethod
    def validate_duty(d: ArrayLike, closed: bool = True) -> ArrayLike:
        """
        Validate a duty ratio.

        Args:
            d: Duty ratio (scalar or array)
            closed: Accept the end points 0 and 1

        Returns:
            Validated duty ratio

        Raises:
            DomainError: If any value lies outside [0, 1] (or (0, 1) when not closed)
        """
        arr = np.asarray(d, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise DomainError("Duty ratio must be finite", field="D")
        if closed:
            bad = np.any((arr < 0.0) | (arr > 1.0))
        else:
            bad = np.any((arr <= 0.0) | (arr >= 1.0))
        if bad:
            interval = "[0, 1]" if closed else "(0, 1)"
            raise DomainError(f"Duty ratio must lie in {interval}", field="D")
        return d

    @staticmethod
    def validate_ratio(value: ArrayLike, name: str = "p") -> ArrayLike:
        """
        Validate a normalized frequency ratio such as p = w_p/w_s.

        Raises:
            DomainError: If any value is not strictly positive
        """
        arr = np.asarray(value, dtype=float)
        if np.any(~(arr > 0.0)):
            raise DomainError(f"{name} must be strictly positive", field=name)
        return value

    @staticmethod
    def validate_positive(value: float, name: str) -> float:
        """Validate a strictly positive finite scalar."""
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be a positive finite number", field=name)
        return float(value)

    @staticmethod
    def validate_order(k: int, name: str = "k", minimum: int = 0) -> int:
        """Validate an integer order of at least ``minimum``."""
        if int(k) != k or k < minimum:
            raise DomainError(f"{name} must be an integer >= {minimum}", field=name)
        return int(k)
