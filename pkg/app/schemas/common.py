"""
CLI 응답 봉투
성공하면 StatusResponse 를 표준 출력으로, 실패하면 ErrorResponse 를 표준 오류로 내보냅니다.
"""

from typing import Any, Dict, List, Optional
from pydantic import BaseModel, Field


class StatusResponse(BaseModel):
    """하위 명령 완료 보고"""
    success: bool = Field(default=True)
    command: str = Field(..., description="실행한 하위 명령")
    message: str = Field(..., description="요약 메시지")
    output_dir: str = Field(..., description="출력 디렉터리")
    files: List[str] = Field(default_factory=list, description="기록된 파일 (manifest.json 포함)")


class ErrorResponse(BaseModel):
    """실패 보고 (exit_code 는 프로세스 종료 코드와 같음)"""
    success: bool = Field(default=False)
    command: str
    message: str
    error_code: str = Field(..., description="예: CONFIG_ERROR, NO_SIGN_CHANGE")
    exit_code: int = Field(..., ge=1)
    details: Optional[Dict[str, Any]] = Field(default=None)
