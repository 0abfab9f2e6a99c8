"""
서비스 레이어 모듈
"""

from .scenario_service import ScenarioService
from .sweep_service import SweepService

__all__ = ["ScenarioService", "SweepService"]
