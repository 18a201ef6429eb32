from .converter import ConverterConfig, Scheme, Topology, VoltageLoop
from .loopgain import LoopGainSum, PartialFractionTerm, RationalLoopGain, TermKind
from .results import (
    AlphaTerms,
    Classification,
    ConservativeChecks,
    ConverterState,
    DutyPoint,
    GainBound,
    Limit,
    OperatingPoint,
    PeriodicOrbit,
    PoincareResult,
    ReportLeg,
    SimTrace,
    SsaaResult,
    StabilityReport,
    StabilityVerdict,
    SweepCell,
    SweepGrid,
    VoltageLoopResult,
)

__all__ = [
    "AlphaTerms", "Classification", "ConservativeChecks", "ConverterConfig", "ConverterState",
    "DutyPoint", "GainBound", "Limit", "LoopGainSum", "OperatingPoint", "PartialFractionTerm",
    "PeriodicOrbit", "PoincareResult", "RationalLoopGain", "ReportLeg", "Scheme", "SimTrace",
    "SsaaResult", "StabilityReport", "StabilityVerdict", "SweepCell", "SweepGrid", "TermKind",
    "Topology", "VoltageLoop", "VoltageLoopResult",
]
