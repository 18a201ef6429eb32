"""
Operating points, average-model loop gains and their frequency response.
"""
import logging
import math
from typing import List, Optional, Union

import control as ct
import numpy as np
from scipy.optimize import brentq

from fsikit.core.config import settings
from fsikit.core.exceptions import CoverageError, CrossoverError, DomainError, UnsupportedTopologyError
from fsikit.core.validators import CommonValidators
from fsikit.schemas.converter import ConverterConfig, Scheme, Topology, VoltageLoop
from fsikit.schemas.loopgain import LoopGainSum, PartialFractionTerm, RationalLoopGain, TermKind
from fsikit.schemas.results import DutyPoint, OperatingPoint, SsaaResult

logger = logging.getLogger(__name__)

LoopGain = Union[RationalLoopGain, LoopGainSum]

_DUTY_EDGE = 1e-9


def _stage(cfg: ConverterConfig, d: float) -> dict:
    """Averaged CCM power stage at duty d, capacitor ESR included."""
    v_s, R, R_c, L, rho = cfg.v_s, cfg.R, cfg.R_c, cfg.L, cfg.rho
    if cfg.topology is Topology.BUCK:
        v_o = d * v_s
        return dict(current=v_o / R, v_cap=v_o, v_o=v_o, v_o_off=v_o,
                    m1=(v_s - v_o) / L, m2=v_o / L)
    x = 1.0 - d
    num = v_s if cfg.topology is Topology.BOOST else d * v_s
    current = num / (rho * x * (R * x + R_c))
    v_cap = x * R * current
    v_o_off = rho * current * (x * R + R_c)
    m2 = (v_o_off - v_s) / L if cfg.topology is Topology.BOOST else v_o_off / L
    return dict(current=current, v_cap=v_cap, v_o=v_cap, v_o_off=v_o_off, m1=v_s / L, m2=m2)


def _duty_for_output(cfg: ConverterConfig, v_o: float) -> float:
    v_s, rho, ratio = cfg.v_s, cfg.rho, cfg.R_c / cfg.R
    if cfg.topology is Topology.BUCK:
        d = v_o / v_s
    elif cfg.topology is Topology.BOOST:
        d = 1.0 - (v_s / (rho * v_o) - ratio)
    else:
        d = 1.0 - (v_s - rho * v_o * ratio) / (v_s + rho * v_o)
    if not 0.0 < d < 1.0:
        raise DomainError(f"No CCM duty ratio reaches v_o = {v_o:.6g} V", field="v_o")
    return d


def _control_current(cfg: ConverterConfig, d: float, stage: dict, v_c: float) -> float:
    if cfg.scheme is Scheme.PCMC:
        return (v_c - cfg.V_l - cfg.V_m * d) / cfg.R_s - stage["m1"] * d * cfg.T / 2.0
    return v_c / cfg.R_s


class LoopGainService:
    """Average-model loop gains and crossover analysis."""

    @staticmethod
    def duty_and_va(cfg: ConverterConfig) -> DutyPoint:
        """Ideal duty ratio, inductor slopes and v_a = L(m1 + m2)."""
        d, v_s, v_o, L = cfg.nominal_duty, cfg.v_s, cfg.nominal_v_o, cfg.L
        if cfg.topology is Topology.BUCK:
            m1, m2 = (v_s - v_o) / L, v_o / L
        elif cfg.topology is Topology.BOOST:
            m1, m2 = v_s / L, (v_o - v_s) / L
        else:
            m1, m2 = v_s / L, v_o / L
        return DutyPoint(duty=d, v_a=L * (m1 + m2), m1=m1, m2=m2)

    @staticmethod
    def operating_point(cfg: ConverterConfig) -> OperatingPoint:
        """
        Averaged CCM steady state including the capacitor ESR.

        A closed PI/type-II voltage loop regulates v_o to v_r; a proportional
        loop and an explicit v_c are solved against the current-loop relation;
        otherwise the nominal v_o or duty is used. With R_c = 0 the duty ratio
        and v_a equal duty_and_va.

        Raises:
            DomainError: If no CCM duty ratio satisfies the constraints
        """
        loop = cfg.voltage_loop
        if loop in (VoltageLoop.PI, VoltageLoop.TYPE2):
            d = _duty_for_output(cfg, cfg.v_r)
        elif loop is VoltageLoop.PROPORTIONAL or cfg.v_c is not None:
            def control_voltage(st: dict) -> float:
                if loop is VoltageLoop.PROPORTIONAL:
                    return cfg.k_p * (cfg.v_r - st["v_o"])
                return cfg.v_c

            def mismatch(dd: float) -> float:
                st = _stage(cfg, dd)
                return st["current"] - _control_current(cfg, dd, st, control_voltage(st))

            lo, hi = _DUTY_EDGE, 1.0 - _DUTY_EDGE
            f_lo, f_hi = mismatch(lo), mismatch(hi)
            if np.sign(f_lo) == np.sign(f_hi):
                raise DomainError("Control voltage admits no CCM operating point", field="v_c")
            d = brentq(mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        elif cfg.duty is not None:
            d = cfg.duty
        else:
            d = _duty_for_output(cfg, cfg.v_o)

        st = _stage(cfg, d)
        if loop is VoltageLoop.PROPORTIONAL:
            v_c = cfg.k_p * (cfg.v_r - st["v_o"])
        elif cfg.v_c is not None and loop is VoltageLoop.OPEN:
            v_c = cfg.v_c
        elif cfg.scheme is Scheme.PCMC:
            v_c = cfg.R_s * (st["current"] + st["m1"] * d * cfg.T / 2.0) + cfg.V_l + cfg.V_m * d
        else:
            v_c = cfg.R_s * st["current"]

        valley = st["current"] - st["m1"] * d * cfg.T / 2.0
        if valley <= 0:
            logger.warning("Averaged valley current %.4g A is not positive; expect DCM", valley)
        return OperatingPoint(
            duty=d, v_a=cfg.L * (st["m1"] + st["m2"]), m1=st["m1"], m2=st["m2"],
            inductor_current=st["current"], valley_current=valley, capacitor_voltage=st["v_cap"],
            v_o=st["v_o"], v_o_off=st["v_o_off"], v_c=v_c,
        )

    @staticmethod
    def build_loop_gain(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> RationalLoopGain:
        """Current-loop gain of the average model for the configured scheme."""
        point = point or LoopGainService.duty_and_va(cfg)
        base = point.v_a * cfg.R_s / (cfg.V_m * cfg.L)
        if cfg.scheme is Scheme.PCMC:
            return RationalLoopGain(gain=base, origin_order=1)
        if cfg.scheme is Scheme.ACMC_TYPE2:
            return RationalLoopGain(gain=base * cfg.K_c, zeros=[cfg.omega_z], poles=[cfg.omega_p], origin_order=2)
        return RationalLoopGain(gain=base * cfg.K_c, zeros=[cfg.omega_z], origin_order=2)

    @staticmethod
    def voltage_path_gain(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> RationalLoopGain:
        """
        Voltage-loop path of a PCMC buck, compensator in its high-frequency form.

        Raises:
            UnsupportedTopologyError: Unless PCMC buck with a closed voltage loop
        """
        if cfg.topology is not Topology.BUCK or cfg.scheme is not Scheme.PCMC:
            raise UnsupportedTopologyError("Voltage-loop analysis covers the PCMC buck only")
        if cfg.voltage_loop is VoltageLoop.OPEN:
            raise UnsupportedTopologyError("Configuration has no closed voltage loop")
        point = point or LoopGainService.duty_and_va(cfg)
        loop = cfg.voltage_loop
        k = cfg.k_p if loop is VoltageLoop.PROPORTIONAL else cfg.vl_K_c / cfg.vl_omega_z
        gain = cfg.rho * point.v_a * k / (cfg.V_m * cfg.L * cfg.C)
        zeros = [] if cfg.omega_esr is None else [cfg.omega_esr]
        poles = [cfg.vl_omega_p] if loop is VoltageLoop.TYPE2 else []
        return RationalLoopGain(gain=gain, zeros=zeros, poles=poles, origin_order=2)

    @staticmethod
    def build_pcmc_voltage_loop_gain(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> LoopGainSum:
        """Current path plus voltage path of a PCMC buck."""
        current = LoopGainService.build_loop_gain(cfg, point)
        return LoopGainSum(parts=[current, LoopGainService.voltage_path_gain(cfg, point)])

    @staticmethod
    def loop_gain_for(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> LoopGain:
        if cfg.voltage_loop is VoltageLoop.OPEN:
            return LoopGainService.build_loop_gain(cfg, point)
        return LoopGainService.build_pcmc_voltage_loop_gain(cfg, point)

    @staticmethod
    def simplified_type2_gain(k: float, p: float, omega_s: float) -> RationalLoopGain:
        """K*w_s/(s(1 + s/(p*w_s))), the type-II gain above the compensator zero."""
        return RationalLoopGain(gain=k * omega_s, poles=[p * omega_s], origin_order=1)

    @staticmethod
    def simplified_pi_gain(ktilde: float, z: float, omega_s: float) -> RationalLoopGain:
        """K~*w_s**2*(1 + s/(z*w_s))/s**2."""
        return RationalLoopGain(gain=ktilde * omega_s**2, zeros=[z * omega_s], origin_order=2)

    @staticmethod
    def partial_fractions(gain: LoopGain) -> List[PartialFractionTerm]:
        """
        Expand into origin and simple real-pole terms.

        Raises:
            CoverageError: On origin order > 2, repeated poles or a direct term
        """
        if isinstance(gain, LoopGainSum):
            terms: List[PartialFractionTerm] = []
            for part in gain.parts:
                terms.extend(LoopGainService.partial_fractions(part))
            return LoopGainService.combine_terms(terms)

        m, zeros, poles, k = gain.origin_order, gain.zeros, gain.poles, gain.gain
        if m > 2:
            raise CoverageError(f"Origin pole of order {m} has no F-transform entry")
        if len(zeros) >= len(poles) + m:
            raise CoverageError("Loop gain is not strictly proper")
        if len(set(poles)) != len(poles):
            raise CoverageError("Repeated real poles have no F-transform entry")

        terms = []
        if m == 1:
            terms.append(PartialFractionTerm(kind=TermKind.ORIGIN_1, coefficient=k))
        elif m == 2:
            slope = sum(1.0 / w for w in zeros) - sum(1.0 / w for w in poles)
            terms.append(PartialFractionTerm(kind=TermKind.ORIGIN_2, coefficient=k))
            terms.append(PartialFractionTerm(kind=TermKind.ORIGIN_1, coefficient=k * slope))
        for j, wp in enumerate(poles):
            num = math.prod(1.0 - wp / wz for wz in zeros)
            den = (-wp) ** m * math.prod(1.0 - wp / wl for l, wl in enumerate(poles) if l != j)
            terms.append(PartialFractionTerm(kind=TermKind.REAL_POLE, coefficient=k * wp * num / den, pole=wp))
        return terms

    @staticmethod
    def combine_terms(terms: List[PartialFractionTerm]) -> List[PartialFractionTerm]:
        """Merge terms of the same kind and pole."""
        merged: dict = {}
        for term in terms:
            key = (term.kind, term.pole)
            merged[key] = merged.get(key, 0.0) + term.coefficient
        return [PartialFractionTerm(kind=kind, coefficient=c, pole=pole) for (kind, pole), c in merged.items()]

    @staticmethod
    def to_transfer_function(gain: LoopGain) -> ct.TransferFunction:
        """python-control transfer function of a loop gain; sums become parallel connections."""
        if isinstance(gain, LoopGainSum):
            parts = [LoopGainService.to_transfer_function(part) for part in gain.parts]
            total = parts[0]
            for part in parts[1:]:
                total = ct.parallel(total, part)
            return total
        num = np.array([gain.gain])
        for wz in gain.zeros:
            num = np.polymul(num, [1.0 / wz, 1.0])
        den = np.array([1.0] + [0.0] * gain.origin_order)
        for wp in gain.poles:
            den = np.polymul(den, [1.0 / wp, 1.0])
        return ct.TransferFunction(num, den)

    @staticmethod
    def evaluate_at(gain: LoopGain, omega: Union[float, np.ndarray]) -> Union[complex, np.ndarray]:
        """T(j*omega)."""
        if isinstance(gain, LoopGainSum):
            return sum(LoopGainService.evaluate_at(part, omega) for part in gain.parts)
        w = np.asarray(omega, dtype=float)
        value = np.asarray(LoopGainService.to_transfer_function(gain)((1j * w).ravel())).reshape(w.shape)
        return complex(value) if w.ndim == 0 else value

    @staticmethod
    def crossover_frequency(gain: LoopGain, omega_s: float) -> float:
        """
        Unique w_c with |T(j w_c)| = 1 inside the configured bracket.

        Candidates come from ``control.stability_margins``; a candidate that
        misses the scanned crossing is replaced by a bracketed root.

        Raises:
            CrossoverError: If there is no crossing or more than one
        """
        u = np.linspace(
            math.log(settings.CROSSOVER_BRACKET_LO * omega_s),
            math.log(settings.CROSSOVER_BRACKET_HI * omega_s),
            settings.CROSSOVER_SCAN_POINTS,
        )

        def log_mag(x):
            return np.log(np.abs(LoopGainService.evaluate_at(gain, np.exp(x))))

        f = log_mag(u)
        idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) <= 0)[0]
        if len(idx) != 1:
            raise CrossoverError(f"Found {len(idx)} gain crossings between "
                                 f"{settings.CROSSOVER_BRACKET_LO:g} and {settings.CROSSOVER_BRACKET_HI:g} w_s")
        i = idx[0]
        if f[i] == 0.0:
            return float(math.exp(u[i]))

        lo, hi = math.exp(u[i]), math.exp(u[i + 1])
        _, _, _, _, wgc, _ = ct.stability_margins(LoopGainService.to_transfer_function(gain), returnall=True)
        for w in np.atleast_1d(wgc):
            w = float(np.real(w))
            if lo <= w <= hi and abs(log_mag(math.log(w))) < settings.CROSSOVER_RTOL:
                return w
        logger.debug("No python-control crossover in [%g, %g]; refining the scanned bracket", lo, hi)
        root = brentq(log_mag, u[i], u[i + 1], xtol=settings.CROSSOVER_RTOL)
        return float(math.exp(root))

    @staticmethod
    def phase_deg(gain: LoopGain, omega: float) -> float:
        """Phase of T(j*omega) in degrees, taken in (-360, 0]."""
        phase = math.degrees(np.angle(LoopGainService.evaluate_at(gain, omega)))
        return phase - 360.0 if phase > 0 else phase

    @staticmethod
    def phase_margin(gain: LoopGain, omega_s: float) -> float:
        w_c = LoopGainService.crossover_frequency(gain, omega_s)
        return 180.0 + LoopGainService.phase_deg(gain, w_c)

    @staticmethod
    def crossover_type2_closed(k: float, p: float, omega_s: float) -> float:
        """Crossover of K*w_s/(s(1 + s/(p*w_s)))."""
        CommonValidators.validate_positive(k, "K")
        CommonValidators.validate_positive(p, "p")
        return omega_s * math.sqrt(2.0) * k * p / math.sqrt(math.sqrt(p**4 + 4 * k * k * p * p) + p * p)

    @staticmethod
    def crossover_pi_closed(ktilde: float, z: float, omega_s: float) -> float:
        """Crossover of K~*w_s**2*(1 + s/(z*w_s))/s**2."""
        CommonValidators.validate_positive(ktilde, "K~")
        CommonValidators.validate_positive(z, "z")
        kt2 = ktilde * ktilde
        return omega_s * math.sqrt((math.sqrt(kt2 * kt2 + 4 * kt2 * z**4) + kt2) / 2.0) / z

    @staticmethod
    def phase_margin_type2_closed(k: float, p: float) -> float:
        """Phase margin of the simplified type-II gain: 90 - atan(w_c/w_p)."""
        ratio = LoopGainService.crossover_type2_closed(k, p, 1.0)
        return 90.0 - math.degrees(math.atan(ratio / p))

    @staticmethod
    def ssaa(cfg: ConverterConfig, point: Optional[DutyPoint] = None) -> SsaaResult:
        """Crossover and phase margin of the configured loop gain."""
        gain = LoopGainService.loop_gain_for(cfg, point)
        w_c = LoopGainService.crossover_frequency(gain, cfg.omega_s)
        return SsaaResult(
            omega_c=w_c,
            crossover_ratio=w_c / cfg.omega_s,
            phase_margin_deg=180.0 + LoopGainService.phase_deg(gain, w_c),
        )
