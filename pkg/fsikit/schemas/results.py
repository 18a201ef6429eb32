"""
Result records returned by the analysis services.
"""
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from fsikit.schemas.converter import Scheme, Topology


class Limit(str, Enum):
    """Marker for a gain bound that does not exist."""
    ALWAYS_STABLE = "ALWAYS_STABLE"


GainBound = Union[float, Limit]


class AlphaTerms(BaseModel):
    alpha0: float = Field(..., description="pi*(2D-1)")
    alpha1: float = Field(..., description="pi**2*(2D**2-2D+1)")
    correction: float = Field(..., description="alpha - alpha0 + alpha1*p")
    closed: float = Field(..., description="Closed-form alpha(D, p)")

    model_config = ConfigDict(frozen=True)


class DutyPoint(BaseModel):
    """Duty ratio and inductor slopes of a CCM operating point."""
    duty: float
    v_a: float = Field(..., description="L*(m1 + m2)")
    m1: float = Field(..., description="Inductor current rising slope (A/s)")
    m2: float = Field(..., description="Inductor current falling slope magnitude (A/s)")

    model_config = ConfigDict(frozen=True)


class OperatingPoint(DutyPoint):
    """Averaged CCM steady state including the capacitor ESR."""
    inductor_current: float
    valley_current: float = Field(..., description="Inductor current at the clock instant")
    capacitor_voltage: float
    v_o: float = Field(..., description="Average output voltage")
    v_o_off: float = Field(..., description="Output voltage during the off phase")
    v_c: float = Field(..., description="Control voltage consistent with this point")


class StabilityVerdict(BaseModel):
    stable: bool
    index: float = Field(..., description="S/m_a; stable below 1")
    required_ramp_slope: float = Field(..., description="S (V/s)")
    ramp_slope: float = Field(..., description="m_a (V/s)")
    method: str
    gain: Optional[float] = Field(None, description="K or K~ of the closed form")
    bound: Optional[GainBound] = Field(None, description="K_max or K~_max")

    model_config = ConfigDict(frozen=True)

    @property
    def margin(self) -> float:
        """Relative ramp margin 1 - S/m_a."""
        return 1.0 - self.index


class ConservativeChecks(BaseModel):
    k_lt_1_over_pi: Optional[bool] = None
    ktilde_lt_z_over_pi: Optional[bool] = None
    ktilde_lt_any_d_bound: Optional[bool] = None
    wc_lt_ws_over_pi: Optional[bool] = None


class VoltageLoopResult(BaseModel):
    m_v: float = Field(..., description="Voltage-loop share of the required ramp (V/s)")
    m_i: float = Field(..., description="Current-loop share of the required ramp (V/s)")
    index: float
    stable: bool


class SsaaResult(BaseModel):
    omega_c: float
    crossover_ratio: float = Field(..., description="omega_c/omega_s")
    phase_margin_deg: float


class SweepCell(BaseModel):
    stable: bool
    bound: GainBound
    straddles_sign_change: bool = False


class SweepGrid(BaseModel):
    """Closed-form stability over (D, p) or (D, z); bound is +inf where ALWAYS_STABLE."""
    scheme: Scheme
    gain: float
    d_values: np.ndarray
    axis_name: str
    axis_values: np.ndarray
    bound: np.ndarray
    stable: np.ndarray
    straddle: np.ndarray
    topology: Topology = Topology.BOOST
    overlay: Optional[np.ndarray] = Field(None, description="Reference gain bound per D")

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def cell(self, i: int, j: int) -> SweepCell:
        b = float(self.bound[i, j])
        return SweepCell(
            stable=bool(self.stable[i, j]),
            bound=Limit.ALWAYS_STABLE if np.isinf(b) else b,
            straddles_sign_change=bool(self.straddle[i, j]),
        )


class ConverterState(BaseModel):
    t: float
    i_L: float
    v_C: float
    x_c: List[float] = Field(default_factory=list, description="Compensator states")


class Classification(str, Enum):
    PERIOD1 = "PERIOD1"
    SUBHARMONIC = "SUBHARMONIC"
    DCM = "DCM"
    UNCLASSIFIED = "UNCLASSIFIED"


class SimTrace(BaseModel):
    """Switched simulation output; clock samples are taken at t = (n+1)T."""
    state_labels: List[str]
    period: float
    times: np.ndarray
    states: np.ndarray
    switch: np.ndarray
    v_o: np.ndarray
    y: np.ndarray
    h: np.ndarray
    clock_states: np.ndarray
    duty_sequence: np.ndarray
    classification: Classification
    dcm: bool = False

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def clock_samples(self) -> List[ConverterState]:
        out = []
        for n, x in enumerate(self.clock_states):
            out.append(ConverterState(t=(n + 1) * self.period, i_L=x[0], v_C=x[1], x_c=[float(v) for v in x[2:]]))
        return out


class PeriodicOrbit(BaseModel):
    state: np.ndarray
    duty: float
    iterations: int
    residuals: List[float]

    model_config = ConfigDict(arbitrary_types_allowed=True)


class PoincareResult(BaseModel):
    orbit: PeriodicOrbit
    jacobian: np.ndarray
    eigenvalues: np.ndarray
    stable: bool
    marginal: bool
    dominant_modulus: float
    warnings: List[str] = Field(default_factory=list)

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def dominant(self) -> complex:
        """Eigenvalue of largest modulus."""
        return complex(self.eigenvalues[int(np.argmax(np.abs(self.eigenvalues)))])


class ReportLeg(BaseModel):
    name: str
    stable: Optional[bool] = None
    summary: str = ""
    error: Optional[str] = None
    values: Dict[str, Union[float, str]] = Field(default_factory=dict, description="Numbers behind the summary")


class StabilityReport(BaseModel):
    config_name: str
    legs: List[ReportLeg]
    agree: bool
    details: Dict[str, Union[float, str]] = Field(
        default_factory=dict, description="Leg values keyed <leg>_<name>, e.g. sda_dominant_modulus"
    )
