"""
시뮬레이터 설정
급수 절단, 근 찾기, 사슬 절단, 출력 형식 등 수치 정책을 환경 변수/.env 로 조정합니다.
"""

import os
from typing import Optional
from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """수치 정책과 실행 환경 설정"""

    app_name: str = Field(default="selective-phonon-sim")
    app_version: str = Field(default="1.0.0")
    app_env: str = Field(default="development")

    # 로깅
    log_level: str = Field(default="INFO")
    log_format: str = Field(default="%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # 급수 절단 설정 (f1, f2, g(x,y) 합)
    series_max_terms: int = Field(default=40, ge=1)
    series_tail_tol: float = Field(default=1e-14, gt=0)

    # 근 찾기 설정
    root_tol: float = Field(default=1e-9, gt=0)
    root_max_iter: int = Field(default=200, ge=1)
    pole_margin: float = Field(default=0.01, gt=0)
    bracket_half_width: float = Field(default=0.5, gt=0)
    bracket_scan_points: int = Field(default=400, ge=3)

    # 근사 조건 판정 임계값
    condition_ok_threshold: float = Field(default=0.2, gt=0)
    condition_warn_threshold: float = Field(default=0.5, gt=0)

    # 포논 사슬 절단 설정
    chain_tail_tol: float = Field(default=1e-12, gt=0)
    chain_initial_size: int = Field(default=32, ge=2)
    chain_max_size: int = Field(default=20000, ge=2)

    # 위그너 질량 점검 허용치
    wigner_mass_tol: float = Field(default=1e-4, gt=0)

    # 출력 설정
    csv_float_format: str = Field(default="%.17g")
    default_parallel: Optional[int] = Field(default=None, ge=1)

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False

    @property
    def parallelism(self) -> int:
        """스윕 작업자 수 (기본값: 사용 가능한 CPU 수)"""
        return self.default_parallel or os.cpu_count() or 1


class DevelopmentSettings(Settings):
    """개발: 파이프라인 단계와 파일 기록까지 DEBUG 로 남김"""
    log_level: str = "DEBUG"


class ProductionSettings(Settings):
    """배치 실행: 경고 이상만 기록"""
    app_env: str = "production"
    log_level: str = "WARNING"


class TestSettings(Settings):
    """테스트: 스윕을 한 프로세스에서 순서대로 실행"""
    app_env: str = "test"
    default_parallel: Optional[int] = 1
    chain_max_size: int = 4096


def get_settings_by_env(env: Optional[str] = None) -> Settings:
    """환경에 따른 설정 반환"""
    if env is None:
        env = os.getenv("APP_ENV", "development").lower()

    if env == "production":
        return ProductionSettings()
    elif env == "test":
        return TestSettings()
    else:
        return DevelopmentSettings()


# 전역 설정 인스턴스
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """설정 인스턴스를 반환합니다 (싱글톤 패턴)"""
    global _settings
    if _settings is None:
        _settings = get_settings_by_env()
    return _settings
