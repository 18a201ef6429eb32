from .alpha_service import AlphaService
from .config_service import ConfigService
from .export_service import ExportService
from .loopgain_service import LoopGainService
from .report_service import ReportService
from .sda_service import SdaService
from .stability_service import StabilityService
from .switchsim_service import SwitchedModel, SwitchSimService

__all__ = [
    "AlphaService", "ConfigService", "ExportService", "LoopGainService", "ReportService",
    "SdaService", "StabilityService", "SwitchedModel", "SwitchSimService",
]
