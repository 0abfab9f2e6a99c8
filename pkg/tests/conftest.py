"""
공통 테스트 설정과 픽스처
"""

import os

os.environ.setdefault("APP_ENV", "test")

import pytest

from app.schemas.params import SeriesControl, SystemParams


@pytest.fixture
def ctrl() -> SeriesControl:
    return SeriesControl()


@pytest.fixture
def reference_params() -> SystemParams:
    """ω_m=10, J=1, ε=3, Δ_a=−9.7, Δ_b=10, κ_b=0.15, γ_p=1e-5, n̄_p=10 (g 단위)"""
    return SystemParams()


@pytest.fixture
def small_eta_params() -> SystemParams:
    """η = 1e-4 (η → 0 극한 검사용)"""
    return SystemParams(omega_m=1e4)
