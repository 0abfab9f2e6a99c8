"""
시나리오 설정 스키마
JSON 설정 문서를 검증하고 기본값(g 단위 기준 파라미터)을 채웁니다.
"""

import json
import math
from typing import Any, Dict, List, Literal, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.core.exceptions import ConfigError
from app.schemas.params import SystemParams

OutputKind = Literal["populations", "wigner", "metrics", "selectivity", "full_model_validation"]
DEFAULT_OUTPUTS: List[str] = ["populations", "metrics", "selectivity"]


class WignerGridSpec(BaseModel):
    """위그너 격자 (X̄ 위치, Ȳ 운동량)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    xmin: float = Field(default=-4.0)
    xmax: float = Field(default=4.0)
    ymin: float = Field(default=-4.0)
    ymax: float = Field(default=4.0)
    nx: int = Field(default=201, ge=2)
    ny: int = Field(default=201, ge=2)

    @model_validator(mode="after")
    def _check_increasing(self) -> "WignerGridSpec":
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("격자 범위는 증가해야 합니다 (xmin < xmax, ymin < ymax)")
        return self

    @classmethod
    def covering(cls, nbar: float, points: int = 201) -> "WignerGridSpec":
        """|ξ| ≤ max(5, 3√(n̄+1)) 을 덮는 정사각 격자"""
        extent = max(5.0, 3.0 * math.sqrt(nbar + 1.0))
        return cls(xmin=-extent, xmax=extent, ymin=-extent, ymax=extent, nx=points, ny=points)


class ValidationSpec(BaseModel):
    """축소 규모 3모드 전체 모델 검증 설정"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_c: int = Field(default=8, ge=2, le=16, description="포논 절단 차원")
    nbar_p: float = Field(default=0.5, ge=0, description="축소된 열 포논 수")
    gamma_p: Optional[float] = Field(default=None, ge=0, description="미지정 시 params.gamma_p")
    delta_a: Optional[float] = Field(default=None, description="미지정 시 선택성 근 (실패 시 params.delta_a)")


class SweepGrid(BaseModel):
    """(η, j) 격자 또는 명시적 지점 목록"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    eta: List[float] = Field(default_factory=list, description="Lamb-Dicke 파라미터 목록 (ω_m = 1/η)")
    j: List[int] = Field(default_factory=list, description="목표 준위 목록")
    points: List[Dict[str, Any]] = Field(default_factory=list, description="지점별 설정 덮어쓰기")
    use_reference_detuning: bool = Field(default=True, description="기준 조합이면 발표된 기준 Δ_a 사용")


class ScenarioConfig(BaseModel):
    """시나리오 설정 (모든 값은 결정적)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: SystemParams = Field(default_factory=SystemParams)
    target_j: int = Field(default=1, ge=0, description="목표 준위 j")
    bracket: Optional[Tuple[float, float]] = Field(default=None, description="Δ_a 근 구간 [lo, hi]")
    detuning_mode: Literal["fixed", "solve"] = Field(default="fixed")
    outputs: List[OutputKind] = Field(default_factory=lambda: list(DEFAULT_OUTPUTS), min_length=1)
    wigner: WignerGridSpec = Field(default_factory=WignerGridSpec)
    n_c: Optional[int] = Field(default=None, ge=2, description="포논 절단 (미지정 시 자동)")
    validation: ValidationSpec = Field(default_factory=ValidationSpec)
    sweep: Optional[SweepGrid] = Field(default=None)
    output_dir: Optional[str] = Field(default=None)

    @field_validator("outputs")
    @classmethod
    def _unique_outputs(cls, value: List[str]) -> List[str]:
        return list(dict.fromkeys(value))

    @field_validator("bracket")
    @classmethod
    def _ordered_bracket(cls, value: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if value is not None and not value[0] < value[1]:
            raise ValueError("bracket 은 [lo, hi] (lo < hi) 이어야 합니다")
        return value

    @model_validator(mode="after")
    def _check_truncation(self) -> "ScenarioConfig":
        if self.n_c is not None and self.n_c < self.target_j + 2:
            raise ValueError(f"n_c 는 target_j + 2 = {self.target_j + 2} 이상이어야 합니다")
        if self.validation.n_c < self.target_j + 2:
            raise ValueError(f"validation.n_c 는 target_j + 2 = {self.target_j + 2} 이상이어야 합니다")
        return self


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"]) or "<root>"
        parts.append(f"{key}: {item['msg']}")
    return "; ".join(parts)


def build_config(data: Dict[str, Any]) -> ScenarioConfig:
    """사전에서 ScenarioConfig 생성 (오류 시 문제 키를 밝힌 ConfigError)"""
    if not isinstance(data, dict):
        raise ConfigError("설정 문서의 최상위는 JSON 객체여야 합니다")
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(
            f"설정 검증 실패 - {_describe(e)}",
            details={"errors": [{"key": ".".join(map(str, i["loc"])), "message": i["msg"]} for i in e.errors()]},
        ) from e


def parse_config(text: str) -> ScenarioConfig:
    """UTF-8 JSON 설정 문서를 파싱합니다"""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError(f"설정 JSON 파싱 실패 (줄 {e.lineno}, 열 {e.colno}): {e.msg}") from e
    return build_config(data)
