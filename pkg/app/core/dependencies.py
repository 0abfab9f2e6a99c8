"""
의존성 주입 모듈
"""

from typing import Optional
from app.schemas.params import SeriesControl
from app.services.scenario_service import ScenarioService
from app.services.sweep_service import SweepService
from app.config.settings import get_settings

# 전역 변수로 서비스 인스턴스 관리
_series_control: Optional[SeriesControl] = None
_scenario_service: Optional[ScenarioService] = None
_sweep_service: Optional[SweepService] = None


def get_series_control() -> SeriesControl:
    """급수 절단 제어 인스턴스를 반환합니다 (싱글톤 패턴)"""
    global _series_control

    if _series_control is None:
        settings = get_settings()

        _series_control = SeriesControl(
            max_terms=settings.series_max_terms,
            tail_tol=settings.series_tail_tol
        )

    return _series_control


def get_scenario_service() -> ScenarioService:
    """시나리오 서비스 인스턴스를 반환합니다 (싱글톤 패턴)"""
    global _scenario_service

    if _scenario_service is None:
        _scenario_service = ScenarioService(get_settings(), get_series_control())

    return _scenario_service


def get_sweep_service() -> SweepService:
    """스윕 서비스 인스턴스를 반환합니다 (싱글톤 패턴)"""
    global _sweep_service

    if _sweep_service is None:
        _sweep_service = SweepService(get_settings())

    return _sweep_service
