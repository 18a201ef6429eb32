"""
Closed-form (harmonic balance) stability conditions, gain bounds and sweeps.
"""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from fsikit.core.exceptions import DomainError, UnsupportedTopologyError
from fsikit.core.validators import CommonValidators
from fsikit.schemas.converter import ConverterConfig, Scheme, Topology
from fsikit.schemas.results import (
    ConservativeChecks,
    DutyPoint,
    GainBound,
    Limit,
    StabilityVerdict,
    SweepGrid,
    VoltageLoopResult,
)
from fsikit.services.alpha_service import AlphaService
from fsikit.services.loopgain_service import LoopGainService

logger = logging.getLogger(__name__)


def _bound(denominator: float) -> GainBound:
    return Limit.ALWAYS_STABLE if denominator <= 0 else 1.0 / denominator


def _index_denominator(scheme: Scheme, d: np.ndarray, axis: np.ndarray) -> np.ndarray:
    """alpha0 - alpha for type-II, alpha0/z + alpha1 for PI; broadcasts."""
    if scheme is Scheme.ACMC_TYPE2:
        return AlphaService.alpha0(d) - AlphaService.alpha_closed(d, axis)
    if scheme is Scheme.ACMC_PI:
        return AlphaService.alpha0(d) / axis + AlphaService.alpha1(d)
    raise UnsupportedTopologyError(f"No gain bound is defined for {scheme.value}")


def _sweep_rows(scheme: Scheme, d_values: np.ndarray, axis: np.ndarray) -> np.ndarray:
    return np.asarray(_index_denominator(scheme, d_values[:, None], axis[None, :]))


class StabilityService:
    """Ramp conditions, K_max/K~_max bounds and stability grids."""

    @staticmethod
    def pcmc_min_ramp(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> StabilityVerdict:
        """S = v_a R_s (D - 1/2)/L against m_a."""
        point = point or LoopGainService.duty_and_va(cfg)
        terms = LoopGainService.partial_fractions(LoopGainService.build_loop_gain(cfg, point))
        index = AlphaService.f_transform(terms, point.duty, cfg.omega_s)
        slope = point.v_a * cfg.R_s * (point.duty - 0.5) / cfg.L
        return StabilityVerdict(
            stable=index < 1.0, index=index, required_ramp_slope=slope, ramp_slope=cfg.m_a, method="pcmc",
        )

    @staticmethod
    def kmax(d: float, p: float) -> GainBound:
        """1/(alpha0 - alpha) or ALWAYS_STABLE when alpha0 - alpha <= 0."""
        return _bound(float(_index_denominator(Scheme.ACMC_TYPE2, d, p)))

    @staticmethod
    def ktilde_max(d: float, z: float) -> GainBound:
        """1/(alpha0/z + alpha1) or ALWAYS_STABLE."""
        CommonValidators.validate_ratio(z, "z")
        return _bound(float(_index_denominator(Scheme.ACMC_PI, d, z)))

    @staticmethod
    def normalized_gain(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> float:
        """K = v_a R_s K_c/(V_m w_z L w_s) for type-II, K~ = v_a R_s K_c/(V_m L w_s**2) for PI."""
        point = point or LoopGainService.duty_and_va(cfg)
        base = point.v_a * cfg.R_s * cfg.K_c / (cfg.V_m * cfg.L * cfg.omega_s)
        if cfg.scheme is Scheme.ACMC_TYPE2:
            return base / cfg.omega_z
        if cfg.scheme is Scheme.ACMC_PI:
            return base / cfg.omega_s
        raise UnsupportedTopologyError("Normalized gain is defined for ACMC only")

    @staticmethod
    def acmc_type2_verdict(
        cfg: ConverterConfig, general: bool = False, point: Optional[DutyPoint] = None
    ) -> StabilityVerdict:
        """
        Type-II ACMC condition.

        The simplified form K(alpha0 - alpha) < 1 assumes w_z << w_s; the
        general form applies the F-transform to the full gain.
        """
        if cfg.scheme is not Scheme.ACMC_TYPE2:
            raise UnsupportedTopologyError("Configuration is not ACMC type-II")
        point = point or LoopGainService.duty_and_va(cfg)
        k = StabilityService.normalized_gain(cfg, point)
        bound = StabilityService.kmax(point.duty, cfg.p)
        if general:
            terms = LoopGainService.partial_fractions(LoopGainService.build_loop_gain(cfg, point))
            index = AlphaService.f_transform(terms, point.duty, cfg.omega_s)
        else:
            index = k * float(_index_denominator(Scheme.ACMC_TYPE2, point.duty, cfg.p))
        return StabilityVerdict(
            stable=index < 1.0, index=index, required_ramp_slope=index * cfg.m_a, ramp_slope=cfg.m_a,
            method="acmc_type2_general" if general else "acmc_type2", gain=k, bound=bound,
        )

    @staticmethod
    def acmc_pi_verdict(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> StabilityVerdict:
        """PI ACMC condition K~(alpha0/z + alpha1) < 1."""
        if cfg.scheme is not Scheme.ACMC_PI:
            raise UnsupportedTopologyError("Configuration is not ACMC PI")
        point = point or LoopGainService.duty_and_va(cfg)
        terms = LoopGainService.partial_fractions(LoopGainService.build_loop_gain(cfg, point))
        index = AlphaService.f_transform(terms, point.duty, cfg.omega_s)
        d = point.duty
        slope = (point.v_a * cfg.R_s * cfg.K_c / cfg.L) * (
            (2 * d - 1) / (2 * cfg.omega_z) + (1 - 2 * d + 2 * d * d) * cfg.T / 4
        )
        return StabilityVerdict(
            stable=index < 1.0, index=index, required_ramp_slope=slope, ramp_slope=cfg.m_a, method="acmc_pi",
            gain=StabilityService.normalized_gain(cfg, point), bound=StabilityService.ktilde_max(d, cfg.z),
        )

    @staticmethod
    def pi_simplified_ramp(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> float:
        """(v_a R_s K_c/(L w_z))(D - 1/2), the PI ramp with the alpha1 term dropped."""
        point = point or LoopGainService.duty_and_va(cfg)
        return point.v_a * cfg.R_s * cfg.K_c / (cfg.L * cfg.omega_z) * (point.duty - 0.5)

    @staticmethod
    def pi_any_duty_ramp(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> float:
        """Ramp slope v_a R_s K_c/(2 L w_z) that stabilizes every duty ratio."""
        point = point or LoopGainService.duty_and_va(cfg)
        return point.v_a * cfg.R_s * cfg.K_c / (2.0 * cfg.L * cfg.omega_z)

    @staticmethod
    def verdict(cfg: ConverterConfig, point: Optional[DutyPoint] = None, general: bool = False) -> StabilityVerdict:
        """Dispatch on the configured scheme."""
        if cfg.scheme is Scheme.PCMC:
            return StabilityService.pcmc_min_ramp(cfg, point)
        if cfg.scheme is Scheme.ACMC_TYPE2:
            return StabilityService.acmc_type2_verdict(cfg, general=general, point=point)
        return StabilityService.acmc_pi_verdict(cfg, point)

    @staticmethod
    def conservative_checks(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> ConservativeChecks:
        """Duty-independent sufficient conditions plus the crossover rule of thumb."""
        point = point or LoopGainService.duty_and_va(cfg)
        checks = ConservativeChecks()
        if cfg.scheme is not Scheme.PCMC:
            k = StabilityService.normalized_gain(cfg, point)
            if cfg.scheme is Scheme.ACMC_TYPE2:
                kt, kk = k * cfg.z, k
            else:
                kt, kk = k, k / cfg.z
            z = cfg.z
            checks.k_lt_1_over_pi = kk < 1.0 / math.pi
            checks.ktilde_lt_z_over_pi = kt < z / math.pi
            checks.ktilde_lt_any_d_bound = kt < z / (math.pi * (1.0 + math.pi * z))
        w_c = LoopGainService.crossover_frequency(LoopGainService.build_loop_gain(cfg, point), cfg.omega_s)
        checks.wc_lt_ws_over_pi = w_c < cfg.omega_s / math.pi
        return checks

    @staticmethod
    def sb99_reference_bounds(d: np.ndarray, topology: Topology) -> np.ndarray:
        """
        Earlier duty-dependent K bounds: boost and buck-boost 1/(pi(1-D)),
        buck D/(pi(1-D)), each capped at 1/(2 pi).
        """
        d = np.asarray(d, dtype=float)
        with np.errstate(divide="ignore"):
            if topology is Topology.BUCK:
                raw = d / (math.pi * (1.0 - d))
            else:
                raw = 1.0 / (math.pi * (1.0 - d))
        return np.minimum(raw, 1.0 / (2.0 * math.pi))

    @staticmethod
    def voltage_loop_mv(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> VoltageLoopResult:
        """
        Voltage-loop share m_v of the required ramp for a PCMC buck.

        Stable when v_s R_s (D - 1/2)/L < m_a - m_v.
        """
        point = point or LoopGainService.duty_and_va(cfg)
        d = point.duty
        path = LoopGainService.voltage_path_gain(cfg, point)
        m_v = AlphaService.f_transform(LoopGainService.partial_fractions(path), d, cfg.omega_s) * cfg.m_a
        m_i = point.v_a * cfg.R_s * (d - 0.5) / cfg.L
        index = (m_i + m_v) / cfg.m_a
        return VoltageLoopResult(m_v=m_v, m_i=m_i, index=index, stable=index < 1.0)

    @staticmethod
    def kp_limit(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> GainBound:
        """Largest proportional gain k_p keeping the PCMC buck stable."""
        if cfg.topology is not Topology.BUCK or cfg.scheme is not Scheme.PCMC:
            raise UnsupportedTopologyError("k_p limit covers the PCMC buck only")
        point = point or LoopGainService.duty_and_va(cfg)
        d, w_s = point.duty, cfg.omega_s
        a0, a1 = AlphaService.alpha0(d), AlphaService.alpha1(d)
        esr = 0.0 if cfg.r is None else a0 / cfg.r
        denominator = esr + a1
        numerator = (w_s * cfg.C / cfg.rho) * (cfg.V_m * cfg.L * w_s / point.v_a - cfg.R_s * a0)
        if denominator <= 0:
            return Limit.ALWAYS_STABLE
        return numerator / denominator

    @staticmethod
    def sweep_stability(
        scheme: Scheme,
        gain: float,
        d_values: Sequence[float],
        axis_values: Sequence[float],
        topology: Topology = Topology.BOOST,
        workers: int = 1,
    ) -> SweepGrid:
        """
        Gain bound and verdict on a (D, p) grid (type-II) or (D, z) grid (PI).

        Rows are fanned out to a process pool when workers > 1; the result
        does not depend on the worker count.
        """
        d_arr = np.asarray(d_values, dtype=float)
        ax = np.asarray(axis_values, dtype=float)
        CommonValidators.validate_duty(d_arr)
        CommonValidators.validate_ratio(ax, "p" if scheme is Scheme.ACMC_TYPE2 else "z")
        if scheme is Scheme.PCMC:
            raise UnsupportedTopologyError("Sweeps cover the ACMC schemes only")

        if workers > 1 and len(d_arr) > 1:
            chunks = np.array_split(d_arr, min(workers, len(d_arr)))
            logger.info("Sweeping %d x %d grid on %d workers", len(d_arr), len(ax), len(chunks))
            with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
                parts = list(pool.map(_sweep_rows, [scheme] * len(chunks), chunks, [ax] * len(chunks)))
            den = np.vstack(parts)
        else:
            den = _sweep_rows(scheme, d_arr, ax)

        with np.errstate(divide="ignore"):
            bound = np.where(den > 0, 1.0 / np.where(den > 0, den, 1.0), np.inf)
        stable = gain * den < 1.0
        positive = den > 0
        straddle = np.zeros_like(positive)
        straddle[:, :-1] |= positive[:, :-1] != positive[:, 1:]
        straddle[:, 1:] |= positive[:, :-1] != positive[:, 1:]
        straddle[:-1, :] |= positive[:-1, :] != positive[1:, :]
        straddle[1:, :] |= positive[:-1, :] != positive[1:, :]
        overlay = StabilityService.sb99_reference_bounds(d_arr, topology) if scheme is Scheme.ACMC_TYPE2 else None
        return SweepGrid(
            scheme=scheme, gain=gain, d_values=d_arr, axis_name="p" if scheme is Scheme.ACMC_TYPE2 else "z",
            axis_values=ax, bound=bound, stable=stable, straddle=straddle, topology=topology, overlay=overlay,
        )

    @staticmethod
    def bound_curve(scheme: Scheme, axis_value: float, d_values: Sequence[float]) -> np.ndarray:
        """K_max (or K~_max) over D at one p (or z); +inf where ALWAYS_STABLE."""
        den = np.asarray(_index_denominator(scheme, np.asarray(d_values, dtype=float), axis_value))
        with np.errstate(divide="ignore"):
            return np.where(den > 0, 1.0 / np.where(den > 0, den, 1.0), np.inf)

    @staticmethod
    def dkmax_curve(p: float, d_values: Sequence[float]) -> np.ndarray:
        """D*K_max over D, the buck form of the type-II bound."""
        d = np.asarray(d_values, dtype=float)
        return d * StabilityService.bound_curve(Scheme.ACMC_TYPE2, p, d)

    @staticmethod
    def pm_region(k: float, d_values: Sequence[float], p_values: Sequence[float]) -> np.ndarray:
        """Phase margin (deg) of the simplified type-II gain over (D, p); constant along D."""
        row = np.array([LoopGainService.phase_margin_type2_closed(k, p) for p in p_values])
        return np.tile(row, (len(d_values), 1))

    @staticmethod
    def unstable_window(
        k: float, d: float, p_lo: float, p_hi: float, points: int = 2001
    ) -> List[Tuple[float, float]]:
        """p intervals in [p_lo, p_hi] where K(alpha0 - alpha) >= 1."""
        CommonValidators.validate_positive(k, "K")
        if not 0 < p_lo < p_hi:
            raise DomainError("Need 0 < p_lo < p_hi", field="p")

        def excess(p: float) -> float:
            return k * float(_index_denominator(Scheme.ACMC_TYPE2, d, p)) - 1.0

        grid = np.geomspace(p_lo, p_hi, points)
        values = k * np.asarray(_index_denominator(Scheme.ACMC_TYPE2, d, grid)) - 1.0
        windows: List[Tuple[float, float]] = []
        start = p_lo if values[0] >= 0 else None
        for i in range(len(grid) - 1):
            a, b = values[i], values[i + 1]
            if a < 0 <= b:
                start = brentq(excess, grid[i], grid[i + 1], xtol=1e-14)
            elif a >= 0 > b:
                windows.append((start, brentq(excess, grid[i], grid[i + 1], xtol=1e-14)))
                start = None
        if start is not None:
            windows.append((start, p_hi))
        return windows

    @staticmethod
    def onset_duty(scheme: Scheme, gain: float, axis_value: float,
                   d_lo: float = 0.0, d_hi: float = 1.0, points: int = 1001) -> Optional[float]:
        """Smallest D in [d_lo, d_hi] where the closed-form index reaches 1, or None."""
        grid = np.linspace(d_lo, d_hi, points)
        values = gain * np.asarray(_index_denominator(scheme, grid, axis_value)) - 1.0
        hits = np.nonzero(values >= 0)[0]
        if len(hits) == 0:
            return None
        i = hits[0]
        if i == 0:
            return float(grid[0])
        return brentq(lambda dd: gain * float(_index_denominator(scheme, dd, axis_value)) - 1.0,
                      grid[i - 1], grid[i], xtol=1e-14)


def parse_range(text: str) -> np.ndarray:
    """Parse ``lo:hi:n`` into a linspace."""
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise DomainError(f"Range must look like lo:hi:n, got {text!r}") from exc
