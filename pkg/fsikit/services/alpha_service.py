"""
The alpha function and the F-transform.

alpha(D, p) = 2*pi*csch(2*pi*p) - pi*exp(pi*p*(1-2D))*csch(pi*p) is the
sampled-data correction of a real pole at p = w_p/w_s. It is evaluated as

    4*pi*exp(-2*pi*p)/(1 - exp(-4*pi*p)) - 2*pi*exp(-2*pi*p*D)/(1 - exp(-2*pi*p))

which never overflows. The F-transform maps a partial-fraction term list to
the ramp-normalized instability index contribution of each term.
"""
import logging
from functools import lru_cache
from typing import Iterable, Union

import mpmath
import numpy as np

from fsikit.core.config import settings
from fsikit.core.exceptions import CoverageError
from fsikit.core.validators import CommonValidators
from fsikit.schemas.loopgain import PartialFractionTerm, TermKind
from fsikit.schemas.results import AlphaTerms

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _as_output(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


@lru_cache(maxsize=4096)
def _coefficient(d: float, k: int, dps: int) -> float:
    with mpmath.workdps(dps):
        n = k + 1
        half = mpmath.mpf(1) / 2
        c = (
            mpmath.bernpoly(n, half) * (-4 * mpmath.pi) ** n
            - mpmath.bernpoly(n, mpmath.mpf(d)) * (-2 * mpmath.pi) ** n
        ) / mpmath.factorial(n)
        return float((-1) ** k * c)


class AlphaService:
    """Closed form, series and F-transform of the alpha function."""

    @staticmethod
    def alpha0(d: ArrayLike) -> ArrayLike:
        """alpha at p -> 0: pi*(2D - 1)."""
        CommonValidators.validate_duty(d)
        return _as_output(np.pi * (2.0 * np.asarray(d, dtype=float) - 1.0))

    @staticmethod
    def alpha1(d: ArrayLike) -> ArrayLike:
        """First-order slope: pi**2*(2D**2 - 2D + 1)."""
        CommonValidators.validate_duty(d)
        d = np.asarray(d, dtype=float)
        return _as_output(np.pi**2 * (2.0 * d * d - 2.0 * d + 1.0))

    @staticmethod
    def alpha_closed(d: ArrayLike, p: ArrayLike) -> ArrayLike:
        """
        Closed-form alpha(D, p); broadcasts over array arguments.

        Args:
            d: Duty ratio in [0, 1]
            p: Pole ratio w_p/w_s, strictly positive

        Returns:
            alpha (float for scalar input, ndarray otherwise)

        Raises:
            DomainError: If D is outside [0, 1] or p is not positive
        """
        CommonValidators.validate_duty(d)
        CommonValidators.validate_ratio(p, "p")
        d_arr, p_arr = np.broadcast_arrays(np.asarray(d, dtype=float), np.asarray(p, dtype=float))
        small = p_arr < settings.ALPHA_SMALL_P
        x = 2.0 * np.pi * np.where(small, 1.0, p_arr)
        first = 4.0 * np.pi * np.exp(-x) / -np.expm1(-2.0 * x)
        second = 2.0 * np.pi * np.exp(-x * d_arr) / -np.expm1(-x)
        out = np.where(small, np.pi * (2.0 * d_arr - 1.0), first - second)
        return _as_output(out)

    @staticmethod
    def alpha_coefficient(d: float, k: int) -> float:
        """
        Exact coefficient alpha_k(D) of alpha = sum_k (-1)**k alpha_k(D) p**k.

        Taken from the Bernoulli-polynomial generating function; the series
        converges for p < 1/2.
        """
        CommonValidators.validate_duty(d)
        k = CommonValidators.validate_order(k)
        return _coefficient(float(d), k, settings.SERIES_DPS)

    @staticmethod
    def alpha_series(d: float, p: float, n_terms: int) -> float:
        """Partial sum of the first n_terms series terms."""
        CommonValidators.validate_duty(d)
        CommonValidators.validate_ratio(p, "p")
        CommonValidators.validate_order(n_terms, "n_terms", minimum=1)
        total = 0.0
        for k in range(n_terms - 1, -1, -1):
            total = total * p + (-1) ** k * AlphaService.alpha_coefficient(d, k)
        return total

    @staticmethod
    def alpha_terms(d: float, p: float) -> AlphaTerms:
        """alpha0, alpha1, the higher-order correction and the closed form."""
        a0 = AlphaService.alpha0(d)
        a1 = AlphaService.alpha1(d)
        closed = AlphaService.alpha_closed(d, p)
        return AlphaTerms(alpha0=a0, alpha1=a1, correction=closed - a0 + a1 * p, closed=closed)

    @staticmethod
    def f_transform(terms: Iterable[PartialFractionTerm], d: float, omega_s: float) -> float:
        """
        Apply the F-transform term by term.

        ORIGIN_1 c/s -> c*alpha0/w_s, ORIGIN_2 c/s**2 -> c*alpha1/w_s**2,
        REAL_POLE c/(s + w_p) -> c*alpha(D, w_p/w_s)/w_s.

        Raises:
            CoverageError: On a non-positive or non-finite pole
        """
        CommonValidators.validate_duty(d)
        CommonValidators.validate_positive(omega_s, "omega_s")
        total = 0.0
        for term in terms:
            if term.kind is TermKind.ORIGIN_1:
                total += term.coefficient * AlphaService.alpha0(d) / omega_s
            elif term.kind is TermKind.ORIGIN_2:
                total += term.coefficient * AlphaService.alpha1(d) / omega_s**2
            else:
                if not (np.isfinite(term.pole) and term.pole > 0):
                    raise CoverageError(f"Pole {term.pole!r} is not a real negative-half-plane pole")
                total += term.coefficient * AlphaService.alpha_closed(d, term.pole / omega_s) / omega_s
        return total
