from .app import create_app, preset_tables_deg
from .bridge import GatewayBridge
from .models import (
    CommandAck,
    CommandIn,
    ErrorOut,
    ExperimentRequest,
    ExperimentResponse,
    HealthOut,
    ModuleStateOut,
    PresetsOut,
    StateFrameOut,
)
from .runner import execute

__all__ = [
    "CommandAck",
    "CommandIn",
    "ErrorOut",
    "ExperimentRequest",
    "ExperimentResponse",
    "GatewayBridge",
    "HealthOut",
    "ModuleStateOut",
    "PresetsOut",
    "StateFrameOut",
    "create_app",
    "execute",
    "preset_tables_deg",
]
