"""
물리 파라미터 스키마
모든 주파수/감쇠율은 광역학 결합 g 단위로 표기합니다 (g = 1).
"""

from typing import Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

AlphaConvention = Literal["derived", "literal"]
PhiOrdering = Literal["printed", "swapped"]


class SystemParams(BaseModel):
    """3모드 광역학계 파라미터"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    omega_m: float = Field(default=10.0, description="역학 진동수 ω_m [g]")
    J: float = Field(default=1.0, description="공동 간 결합 J [g]")
    eps: float = Field(default=3.0, description="구동 세기 ε [g]")
    delta_a: float = Field(default=-9.7, description="공동 a 이조 Δ_a [g]")
    delta_b: float = Field(default=10.0, description="공동 b 이조 Δ_b [g]")
    kappa_b: float = Field(default=0.15, description="공동 b 감쇠 κ_b [g]")
    kappa_a: Optional[float] = Field(default=None, description="공동 a 감쇠 κ_a [g] (미지정 시 κ_b)")
    gamma_p: float = Field(default=1e-5, description="역학 감쇠 γ_p [g]")
    nbar_p: float = Field(default=10.0, description="열 포논 수 n̄_p")
    alpha_convention: AlphaConvention = Field(default="derived", description="α_n 전인자 규약")
    phi_ordering: PhiOrdering = Field(default="printed", description="φ_n 이중합의 g 인자 순서")

    @field_validator("omega_m")
    @classmethod
    def _check_omega_m(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("불변식 위반: ω_m > 0 이어야 합니다")
        return value

    @field_validator("kappa_b")
    @classmethod
    def _check_kappa_b(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("불변식 위반: κ_b > 0 이어야 합니다")
        return value

    @field_validator("kappa_a")
    @classmethod
    def _check_kappa_a(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value >= 0:
            raise ValueError("불변식 위반: κ_a ≥ 0 이어야 합니다")
        return value

    @field_validator("gamma_p")
    @classmethod
    def _check_gamma_p(cls, value: float) -> float:
        if not value >= 0:
            raise ValueError("불변식 위반: γ_p ≥ 0 이어야 합니다")
        return value

    @field_validator("nbar_p")
    @classmethod
    def _check_nbar_p(cls, value: float) -> float:
        if not value >= 0:
            raise ValueError("불변식 위반: n̄_p ≥ 0 이어야 합니다")
        return value

    @field_validator("eps")
    @classmethod
    def _check_eps(cls, value: float) -> float:
        if not value >= 0:
            raise ValueError("불변식 위반: ε ≥ 0 이어야 합니다")
        return value

    @property
    def eta(self) -> float:
        """Lamb-Dicke 파라미터 η = g/ω_m"""
        return 1.0 / self.omega_m

    @property
    def kappa_a_effective(self) -> float:
        """κ_a (미지정 시 κ_b와 같게 둡니다)"""
        return self.kappa_b if self.kappa_a is None else self.kappa_a


class SeriesControl(BaseModel):
    """급수 절단 제어"""

    model_config = ConfigDict(frozen=True)

    max_terms: int = Field(default=40, ge=1, description="최대 항 수")
    tail_tol: float = Field(default=1e-14, gt=0, description="상대 절단 허용치")

    @model_validator(mode="after")
    def _check_positive(self) -> "SeriesControl":
        if self.tail_tol >= 1:
            raise ValueError("tail_tol은 1보다 작아야 합니다")
        return self


class EvolveControl(BaseModel):
    """마스터 방정식 시간 전개 제어"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    t_final: float = Field(ge=0, description="전개 종료 시각 [1/g]")
    dt: Optional[float] = Field(default=None, gt=0, description="시간 간격 (미지정 시 최대 감쇠율로부터 결정)")
    method: Literal["rk4-fixed", "rk4-adaptive"] = Field(default="rk4-fixed")
    trace_tol: float = Field(default=1e-8, gt=0, description="매 단계 대각합 허용 편차")
    n_snapshots: int = Field(default=11, ge=2, description="저장할 상태 수 (양 끝 포함)")
    local_tol: float = Field(default=1e-10, gt=0, description="적응 단계 국소 오차 허용치")
