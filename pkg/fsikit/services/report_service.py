"""
Side-by-side report of the four stability methods for one configuration.
"""
import logging
from typing import Callable, Optional

from fsikit.core.config import settings
from fsikit.core.exceptions import FsiError
from fsikit.schemas.converter import ConverterConfig, Scheme, VoltageLoop
from fsikit.schemas.results import Classification, ReportLeg, StabilityReport
from fsikit.services.export_service import fmt
from fsikit.services.loopgain_service import LoopGainService
from fsikit.services.sda_service import SdaService
from fsikit.services.stability_service import StabilityService
from fsikit.services.switchsim_service import SwitchSimService

logger = logging.getLogger(__name__)


def _run_leg(name: str, body: Callable[[], ReportLeg]) -> ReportLeg:
    try:
        return body()
    except FsiError as exc:
        logger.warning("%s leg failed: %s", name, exc.detail)
        return ReportLeg(name=name, error=f"{exc.error_code}: {exc.detail}")
    except Exception as exc:
        logger.warning("%s leg raised %s", name, type(exc).__name__, exc_info=True)
        return ReportLeg(name=name, error=f"{type(exc).__name__}: {exc}")


class ReportService:
    """Runs HBA, SDA, simulation and SSAA and checks that their verdicts agree."""

    @staticmethod
    def hba_leg(cfg: ConverterConfig) -> ReportLeg:
        """Closed-form verdict at the ESR-aware operating point (general form for type-II)."""
        point = LoopGainService.operating_point(cfg)
        if cfg.voltage_loop is not VoltageLoop.OPEN:
            vl = StabilityService.voltage_loop_mv(cfg, point)
            return ReportLeg(
                name="HBA", stable=vl.stable,
                summary=f"index {vl.index:.4f} (m_i {vl.m_i:.4g} V/s, m_v {vl.m_v:.4g} V/s)",
                values={"duty": point.duty, "index": vl.index, "m_i": vl.m_i, "m_v": vl.m_v},
            )
        verdict = StabilityService.verdict(cfg, point, general=True)
        nominal = StabilityService.verdict(cfg)
        summary = f"index {verdict.index:.4f} at D={point.duty:.4f}; nominal index {nominal.index:.4f}"
        if cfg.scheme is not Scheme.PCMC:
            summary += f"; gain {nominal.gain:.4g}, bound {fmt(nominal.bound)}"
        values = {"duty": point.duty, "index": verdict.index, "nominal_index": nominal.index}
        return ReportLeg(name="HBA", stable=verdict.stable, summary=summary, values=values)

    @staticmethod
    def sda_leg(cfg: ConverterConfig) -> ReportLeg:
        result = SdaService.sda_verdict(cfg)
        eig = ", ".join(f"{complex(v).real:.4f}{complex(v).imag:+.4f}j" for v in result.eigenvalues)
        stable: Optional[bool] = None if result.marginal else result.stable
        summary = f"eigenvalues [{eig}]; max |lambda| {result.dominant_modulus:.4f}"
        if result.marginal:
            summary += " (marginal)"
        return ReportLeg(
            name="SDA", stable=stable, summary=summary,
            values={"dominant_modulus": result.dominant_modulus, "duty": result.orbit.duty},
        )

    @staticmethod
    def simulation_leg(cfg: ConverterConfig, n_periods: int) -> ReportLeg:
        trace = SwitchSimService.simulate(cfg, n_periods)
        stable = {Classification.PERIOD1: True, Classification.SUBHARMONIC: False}.get(trace.classification)
        mean_duty = float(trace.duty_sequence[-min(len(trace.duty_sequence), 50):].mean())
        return ReportLeg(
            name="SIM", stable=stable,
            summary=f"{trace.classification.value} after {len(trace.clock_states)} periods; mean duty {mean_duty:.4f}",
            values={"classification": trace.classification.value, "mean_duty": mean_duty},
        )

    @staticmethod
    def ssaa_leg(cfg: ConverterConfig) -> ReportLeg:
        res = LoopGainService.ssaa(cfg)
        return ReportLeg(
            name="SSAA",
            summary=f"w_c/w_s {res.crossover_ratio:.4f}, phase margin {res.phase_margin_deg:.2f} deg",
            values={"crossover_ratio": res.crossover_ratio, "phase_margin_deg": res.phase_margin_deg},
        )

    @staticmethod
    def run_report(cfg: ConverterConfig, name: str = "config", n_periods: Optional[int] = None) -> StabilityReport:
        periods = n_periods or settings.REPORT_PERIODS
        legs = [
            _run_leg("HBA", lambda: ReportService.hba_leg(cfg)),
            _run_leg("SDA", lambda: ReportService.sda_leg(cfg)),
            _run_leg("SIM", lambda: ReportService.simulation_leg(cfg, periods)),
            _run_leg("SSAA", lambda: ReportService.ssaa_leg(cfg)),
        ]
        verdicts = [leg.stable for leg in legs[:3] if leg.stable is not None]
        agree = len(verdicts) >= 2 and len(set(verdicts)) == 1
        details = {f"{leg.name.lower()}_{key}": value for leg in legs for key, value in leg.values.items()}
        return StabilityReport(config_name=name, legs=legs, agree=agree, details=details)
