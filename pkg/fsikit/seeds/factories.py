"""
Factories for the worked-example converter configurations.

All examples share one boost power stage (14 V output, 50 kHz, 46.1 uH,
380 uF with 20 mOhm ESR, 1 Ohm load, 16.4 mOhm sensing, 1 V ramp) and
differ in source voltage, control voltage and compensator.
"""
import math
from typing import Any, Dict, Optional

from fsikit.schemas.converter import ConverterConfig

F_S = 50e3
OMEGA_S = 2.0 * math.pi * F_S
OMEGA_Z = 5652.9

BOOST_STAGE: Dict[str, Any] = {
    "topology": "boost",
    "v_o": 14.0,
    "f_s": F_S,
    "L": 46.1e-6,
    "C": 380e-6,
    "R": 1.0,
    "R_c": 0.02,
    "R_s": 0.0164,
    "V_m": 1.0,
    "V_l": 0.0,
}


class ExampleFactory:
    """Builders for the worked examples and a few generic samples."""

    @staticmethod
    def example1(stable: bool = False) -> ConverterConfig:
        """Type-II ACMC boost at p = 0.75; v_s = 1.96 V is unstable, 2.1 V is stable."""
        v_s, v_c = (2.1, 1.53) if stable else (1.96, 1.64)
        return ConverterConfig(
            **BOOST_STAGE, scheme="acmc_type2", v_s=v_s, v_c=v_c,
            K_c=141670.0, omega_z=OMEGA_Z, omega_p=0.75 * OMEGA_S,
        )

    @staticmethod
    def example2(p: float) -> ConverterConfig:
        """Type-II ACMC boost at D = 0.36 with compensator pole p*w_s."""
        return ConverterConfig(
            **BOOST_STAGE, scheme="acmc_type2", v_s=9.0, v_c=0.357,
            K_c=460420.0, omega_z=OMEGA_Z, omega_p=p * OMEGA_S,
        )

    @staticmethod
    def example3(stable: bool = False, pi: bool = False) -> ConverterConfig:
        """
        Type-II ACMC boost whose pole sits at 3.14e9 rad/s, i.e. a PI compensator
        in practice; ``pi=True`` drops the pole altogether.
        """
        v_s, v_c = (5.88, 0.547) if stable else (5.6, 0.574)
        extra = {} if pi else {"omega_p": 3.14e9}
        return ConverterConfig(
            **BOOST_STAGE, scheme="acmc_pi" if pi else "acmc_type2", v_s=v_s, v_c=v_c,
            K_c=460420.0, omega_z=OMEGA_Z, **extra,
        )

    @staticmethod
    def pcmc_buck(duty: float = 0.6, V_m: float = 1.0, R_c: float = 0.0, v_c: Optional[float] = None) -> ConverterConfig:
        """PCMC buck from 14 V on the shared stage values."""
        stage = {k: v for k, v in BOOST_STAGE.items() if k not in ("topology", "v_o", "R_c", "V_m")}
        return ConverterConfig(
            **stage, topology="buck", scheme="pcmc", v_s=14.0, duty=duty, V_m=V_m, R_c=R_c, v_c=v_c,
        )

    @staticmethod
    def pcmc_boost(duty: float = 0.6, V_m: float = 1.0, R_c: float = 0.0) -> ConverterConfig:
        """PCMC boost with v_o = 14 V, set by duty ratio."""
        stage = {k: v for k, v in BOOST_STAGE.items() if k not in ("v_o", "R_c", "V_m")}
        return ConverterConfig(
            **stage, scheme="pcmc", v_s=14.0 * (1.0 - duty), duty=duty, V_m=V_m, R_c=R_c,
        )

    @staticmethod
    def pcmc_buck_voltage_loop(loop: str = "proportional", k_p: float = 5.0, v_r: float = 8.4) -> ConverterConfig:
        """PCMC buck with a closed voltage loop regulating to v_r."""
        stage = {k: v for k, v in BOOST_STAGE.items() if k not in ("topology", "v_o")}
        params: Dict[str, Any] = {"voltage_loop": loop, "v_r": v_r}
        if loop == "proportional":
            params["k_p"] = k_p
        else:
            params.update(vl_K_c=2000.0, vl_omega_z=2.0 * math.pi * 500.0)
            if loop == "type2":
                params["vl_omega_p"] = 2.0 * math.pi * 20e3
        return ConverterConfig(**stage, topology="buck", scheme="pcmc", v_s=14.0, v_o=v_r, **params)

    @staticmethod
    def catalog() -> Dict[str, ConverterConfig]:
        """Named configs written by the seed script."""
        return {
            "example1_unstable": ExampleFactory.example1(),
            "example1_stable": ExampleFactory.example1(stable=True),
            "example2_p017": ExampleFactory.example2(0.17),
            "example2_p018": ExampleFactory.example2(0.18),
            "example2_p0515": ExampleFactory.example2(0.515),
            "example2_p052": ExampleFactory.example2(0.52),
            "example3_unstable": ExampleFactory.example3(),
            "example3_stable": ExampleFactory.example3(stable=True),
            "example3_pi": ExampleFactory.example3(pi=True),
            "pcmc_buck": ExampleFactory.pcmc_buck(),
            "buck_voltage_loop": ExampleFactory.pcmc_buck_voltage_loop(),
        }
