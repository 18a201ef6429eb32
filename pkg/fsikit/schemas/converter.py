"""
Converter configuration schema.

A config is a flat mapping: power stage, operating point, control scheme and
optional outer voltage loop. Angular frequencies are in rad/s; any of them may
be given in Hz with an ``_hz`` suffix (``omega_z_hz: 900``).
"""
import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Topology(str, Enum):
    BUCK = "buck"
    BOOST = "boost"
    BUCKBOOST = "buckboost"


class Scheme(str, Enum):
    PCMC = "pcmc"
    ACMC_TYPE2 = "acmc_type2"
    ACMC_PI = "acmc_pi"


class VoltageLoop(str, Enum):
    OPEN = "open"
    PROPORTIONAL = "proportional"
    TYPE2 = "type2"
    PI = "pi"


HZ_ALIASES = ("omega_z", "omega_p", "vl_omega_z", "vl_omega_p")


class ConverterConfig(BaseModel):
    """
    Immutable converter configuration.

    Exactly one of ``v_o`` and ``duty`` sets the nominal operating point;
    ``v_c`` optionally pins the control voltage used by the simulator.
    """
    topology: Topology = Field(..., description="Power stage topology")
    scheme: Scheme = Field(..., description="Current-mode control scheme")

    v_s: float = Field(..., gt=0, description="Source voltage (V)", examples=[1.96])
    v_o: Optional[float] = Field(None, gt=0, description="Output voltage magnitude (V)")
    duty: Optional[float] = Field(None, gt=0, lt=1, description="Nominal duty ratio")
    v_c: Optional[float] = Field(None, description="Control voltage override (V)")

    f_s: float = Field(..., gt=0, description="Switching frequency (Hz)", examples=[50e3])
    L: float = Field(..., gt=0, description="Inductance (H)")
    C: float = Field(..., gt=0, description="Output capacitance (F)")
    R: float = Field(..., gt=0, description="Load resistance (Ohm)")
    R_c: float = Field(0.0, ge=0, description="Capacitor ESR (Ohm)")
    R_s: float = Field(..., gt=0, description="Current sense gain (Ohm)")
    V_m: float = Field(..., gt=0, description="Ramp amplitude (V)")
    V_l: float = Field(0.0, description="Ramp offset (V)")

    K_c: Optional[float] = Field(None, gt=0, description="Current compensator integrator gain")
    omega_z: Optional[float] = Field(None, gt=0, description="Compensator zero (rad/s)")
    omega_p: Optional[float] = Field(None, gt=0, description="Compensator pole (rad/s)")

    voltage_loop: VoltageLoop = Field(VoltageLoop.OPEN, description="Outer voltage loop")
    k_p: Optional[float] = Field(None, ge=0, description="Proportional voltage gain")
    v_r: Optional[float] = Field(None, gt=0, description="Voltage reference (V)")
    vl_K_c: Optional[float] = Field(None, gt=0, description="Voltage compensator integrator gain")
    vl_omega_z: Optional[float] = Field(None, gt=0, description="Voltage compensator zero (rad/s)")
    vl_omega_p: Optional[float] = Field(None, gt=0, description="Voltage compensator pole (rad/s)")

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def convert_hz_aliases(cls, data: Any) -> Any:
        """Turn ``<name>_hz`` keys into rad/s values."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        for name in HZ_ALIASES:
            key = f"{name}_hz"
            if key in data:
                if name in data:
                    raise ValueError(f"Give either {name} or {key}, not both")
                data[name] = 2.0 * math.pi * float(data.pop(key))
        return data

    @model_validator(mode="after")
    def check_consistency(self) -> "ConverterConfig":
        if (self.v_o is None) == (self.duty is None):
            raise ValueError("Exactly one of v_o and duty must be given")
        d = self.nominal_duty
        if not 0.0 < d < 1.0:
            raise ValueError(f"Nominal duty ratio {d:.6g} is outside (0, 1)")

        if self.scheme is not Scheme.PCMC:
            if self.K_c is None or self.omega_z is None:
                raise ValueError(f"{self.scheme.value} needs K_c and omega_z")
        if self.scheme is Scheme.ACMC_TYPE2:
            if self.omega_p is None:
                raise ValueError("acmc_type2 needs omega_p")
            if not self.omega_z < self.omega_p:
                raise ValueError("omega_z must be below omega_p")
        elif self.omega_p is not None:
            raise ValueError(f"omega_p is not used by {self.scheme.value}")

        loop = self.voltage_loop
        if loop is not VoltageLoop.OPEN:
            if self.v_r is None:
                raise ValueError("A closed voltage loop needs v_r")
            if loop is VoltageLoop.PROPORTIONAL and self.k_p is None:
                raise ValueError("proportional voltage loop needs k_p")
            if loop in (VoltageLoop.PI, VoltageLoop.TYPE2):
                if self.vl_K_c is None or self.vl_omega_z is None:
                    raise ValueError(f"{loop.value} voltage loop needs vl_K_c and vl_omega_z")
            if loop is VoltageLoop.TYPE2:
                if self.vl_omega_p is None:
                    raise ValueError("type2 voltage loop needs vl_omega_p")
                if not self.vl_omega_z < self.vl_omega_p:
                    raise ValueError("vl_omega_z must be below vl_omega_p")
        return self

    @property
    def nominal_duty(self) -> float:
        """Ideal (lossless) duty ratio of the nominal operating point."""
        if self.duty is not None:
            return self.duty
        v_s, v_o = self.v_s, self.v_o
        if self.topology is Topology.BUCK:
            return v_o / v_s
        if self.topology is Topology.BOOST:
            return 1.0 - v_s / v_o
        return v_o / (v_o + v_s)

    @property
    def nominal_v_o(self) -> float:
        """Ideal output voltage magnitude of the nominal operating point."""
        if self.v_o is not None:
            return self.v_o
        d = self.duty
        if self.topology is Topology.BUCK:
            return d * self.v_s
        if self.topology is Topology.BOOST:
            return self.v_s / (1.0 - d)
        return d * self.v_s / (1.0 - d)

    @property
    def omega_s(self) -> float:
        return 2.0 * math.pi * self.f_s

    @property
    def T(self) -> float:
        return 1.0 / self.f_s

    @property
    def m_a(self) -> float:
        """Ramp slope V_m/T."""
        return self.V_m * self.f_s

    @property
    def rho(self) -> float:
        return self.R / (self.R + self.R_c)

    @property
    def omega_esr(self) -> Optional[float]:
        """ESR zero 1/(C R_c); None when R_c = 0."""
        return None if self.R_c == 0 else 1.0 / (self.C * self.R_c)

    @property
    def p(self) -> Optional[float]:
        return None if self.omega_p is None else self.omega_p / self.omega_s

    @property
    def z(self) -> Optional[float]:
        return None if self.omega_z is None else self.omega_z / self.omega_s

    @property
    def r(self) -> Optional[float]:
        w = self.omega_esr
        return None if w is None else w / self.omega_s
