"""
설정 및 리포트 스키마 모듈
"""

from .params import SystemParams, SeriesControl, EvolveControl
from .scenario import ScenarioConfig, WignerGridSpec, ValidationSpec, SweepGrid, parse_config
from .reports import SelectivityReport, MetricsReport, FullModelReport, RunManifest
from .common import StatusResponse, ErrorResponse

__all__ = [
    "SystemParams",
    "SeriesControl",
    "EvolveControl",
    "ScenarioConfig",
    "WignerGridSpec",
    "ValidationSpec",
    "SweepGrid",
    "parse_config",
    "SelectivityReport",
    "MetricsReport",
    "FullModelReport",
    "RunManifest",
    "StatusResponse",
    "ErrorResponse"
]
