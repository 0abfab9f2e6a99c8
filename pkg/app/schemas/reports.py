"""
결과 리포트 스키마
selectivity.json, metrics.json, validation.json, manifest.json 의 구조를 정의합니다.
"""

from typing import Dict, List, Literal, Optional, Tuple
from pydantic import BaseModel, Field

from app.schemas.params import AlphaConvention, PhiOrdering

ConditionFlag = Literal["OK", "WARN", "FAIL"]


class ConditionCheck(BaseModel):
    """근사 조건 하나의 비율과 판정"""
    name: str = Field(..., description="조건 이름 (예: J/|Δa-Δb|)")
    value: float = Field(..., description="비율 값")
    flag: ConditionFlag = Field(..., description="OK < ok_threshold ≤ WARN < warn_threshold ≤ FAIL")


class LevelEntry(BaseModel):
    """준위별 α_n, φ_n 표"""
    n: int = Field(..., ge=0)
    alpha_n: float = Field(..., description="활성 규약의 α_n [g]")
    phi_n: float = Field(..., description="φ_n [g]")
    phi_over_alpha: Optional[float] = Field(default=None, description="|φ_n|/|α_n| (α_n = 0 이면 없음)")
    energy_shift: Optional[float] = Field(default=None, description="|g,n⟩ 의 구동 유도 에너지 이동 [g]")
    is_target: bool = Field(default=False)


class SelectivityReport(BaseModel):
    """선택성 조건 φ_j = 0 의 해와 근사 조건 점검 결과"""
    j: int = Field(..., ge=0, description="목표 준위")
    alpha_convention: AlphaConvention
    phi_ordering: PhiOrdering
    root_found: bool = Field(default=False)
    delta_a_root: Optional[float] = Field(default=None, description="φ_j = 0 인 Δ_a [g]")
    residual: Optional[float] = Field(default=None, description="근에서의 |φ_j| [g]")
    iterations: Optional[int] = Field(default=None)
    bracket: Optional[Tuple[float, float]] = Field(default=None)
    phi_at_bracket: Optional[Tuple[float, float]] = Field(default=None)
    phi_converged: bool = Field(default=True, description="φ_n k 급수 수렴 여부")
    series_max_terms: Optional[int] = Field(default=None, description="φ_n k 창 크기 (printed 순서에서는 근이 이 값에 따라 달라짐)")
    audited_delta_a: float = Field(..., description="조건 점검에 사용한 Δ_a [g]")
    levels: List[LevelEntry] = Field(default_factory=list)
    conditions: List[ConditionCheck] = Field(default_factory=list)
    truncation_ratio: Dict[str, float] = Field(default_factory=dict, description="규약별 ζ_{j+1}ϖ_j/ζ_j")
    truncation_flag: Dict[str, ConditionFlag] = Field(default_factory=dict)
    thresholds: Dict[str, float] = Field(default_factory=dict)
    reference_delta_a: Optional[float] = Field(default=None, description="발표된 기준 Δ_a [g]")
    reference_deviation: Optional[float] = Field(default=None)
    within_reference_tolerance: Optional[bool] = Field(default=None)


class ConventionMetrics(BaseModel):
    """α_n 규약 하나에 대한 정상상태 관측량"""
    alpha_j: float
    gamma_j: float = Field(..., description="Γ_j = 2α_j²/κ_b")
    eps_j: float
    omega_j: float = Field(..., description="ϖ_j")
    rho_00: float
    nbar: float
    g2: Optional[float] = Field(default=None, description="평균 포논 수가 0이면 없음")
    delta_fock: float
    delta_hs: float
    n_c: int
    truncation_tail: float


class ReferenceComparison(BaseModel):
    """발표된 (g², δ) 값과의 비교"""
    g2_reference: float
    delta_reference: float
    tolerance: float
    g2_deviation: Dict[str, float]
    delta_deviation: Dict[str, float]
    within_tolerance: Dict[str, bool]
    matching_conventions: List[str]
    trends_note: Optional[str] = None


class MetricsReport(BaseModel):
    """metrics.json"""
    j: int
    eta: float
    delta_a: float
    detuning_mode: Literal["fixed", "solve"]
    active_convention: AlphaConvention
    conventions: Dict[str, ConventionMetrics]
    reference: Optional[ReferenceComparison] = None


class FullModelReport(BaseModel):
    """validation.json: 3모드 전체 모델 구조 검증"""
    reconstruction_note: str
    n_c: int
    j: int
    delta_a: float
    nbar_p: float
    gamma_p: float
    kappa_a: float
    kappa_b: float
    phonon_populations: List[float]
    thermal_populations: List[float]
    low_level_mass: float = Field(..., description="Σ_{n≤j} p_n (전체 모델)")
    thermal_low_level_mass: float
    enhancement_ratio: float
    suppression: float = Field(..., description="1 − p_{j+1}/p_{j+1}^thermal")
    cavity_a_vacuum: float
    cavity_b_vacuum: float
    enhanced: bool
    suppressed: bool
    blue_sideband_ratio: Optional[float] = Field(default=None, description="ηε/|Δ_a+ω_m| (Δ_a = −ω_m 이면 없음)")
    diagnosis: Optional[str] = Field(default=None, description="증강/억제 중 하나라도 없을 때의 원인")


class OutputFile(BaseModel):
    name: str
    sha256: str
    bytes: int


class SweepPointStatus(BaseModel):
    label: str
    success: bool
    error_code: Optional[str] = None
    message: Optional[str] = None


class RunManifest(BaseModel):
    """manifest.json: 실행 기록 (시각 정보는 이 파일에만 기록)"""
    tool: str
    version: str
    command: str
    params: Dict[str, object] = Field(default_factory=dict)
    alpha_values: Dict[str, float] = Field(default_factory=dict, description="규약별 α_j")
    files: List[OutputFile] = Field(default_factory=list)
    condition_summary: Dict[str, str] = Field(default_factory=dict)
    reference_summary: Dict[str, object] = Field(default_factory=dict)
    thresholds: Dict[str, float] = Field(default_factory=dict)
    points: List[SweepPointStatus] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    created_at: Optional[str] = None
