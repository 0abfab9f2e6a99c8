"""
출력 기록 서비스
결정적인 CSV/JSON 파일을 쓰고 각 파일의 sha256 요약값을 기록합니다.
"""

import hashlib
import json
import logging
import shutil
from pathlib import Path
from typing import Any, List

import pandas as pd
from pydantic import BaseModel

from app.core.exceptions import OutputPathError
from app.schemas.reports import OutputFile

logger = logging.getLogger(__name__)

CSV_LINE_TERMINATOR = "\r\n"


class OutputWriter:
    """출력 디렉터리 하나에 대한 기록기 (실패 시 이번 실행에서 쓴 파일을 제거)"""

    def __init__(self, directory: Path, float_format: str = "%.17g"):
        self.directory = Path(directory)
        self.float_format = float_format
        self.files: List[OutputFile] = []
        self._created_directory = False

    def prepare(self) -> "OutputWriter":
        if self.directory.exists() and not self.directory.is_dir():
            raise OutputPathError(
                f"출력 경로가 디렉터리가 아닙니다: {self.directory}", details={"out_dir": str(self.directory)}
            )
        if not self.directory.exists():
            try:
                self.directory.mkdir(parents=True)
            except OSError as e:
                raise OutputPathError(
                    f"출력 디렉터리를 만들 수 없습니다: {self.directory} ({e.strerror or e})",
                    details={"out_dir": str(self.directory)},
                ) from e
            self._created_directory = True
        return self

    def _record(self, path: Path, payload: bytes) -> OutputFile:
        try:
            path.write_bytes(payload)
        except OSError as e:
            raise OutputPathError(f"파일을 쓸 수 없습니다: {path} ({e.strerror or e})", details={"path": str(path)}) from e
        entry = OutputFile(name=path.name, sha256=hashlib.sha256(payload).hexdigest(), bytes=len(payload))
        self.files = [f for f in self.files if f.name != entry.name] + [entry]
        logger.debug(f"파일 기록: {path} ({entry.bytes} bytes)")
        return entry

    def write_csv(self, name: str, frame: pd.DataFrame) -> OutputFile:
        """RFC-4180 CSV (CRLF 줄끝, 17자리 유효숫자, 헤더 순서 고정)"""
        text = frame.to_csv(index=False, float_format=self.float_format, lineterminator=CSV_LINE_TERMINATOR)
        return self._record(self.directory / name, text.encode("utf-8"))

    def write_json(self, name: str, payload: Any) -> OutputFile:
        """키 정렬된 JSON (pydantic 모델은 JSON 호환 dict 로 변환)"""
        if isinstance(payload, BaseModel):
            payload = payload.model_dump(mode="json")
        text = json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        return self._record(self.directory / name, text.encode("utf-8"))

    def cleanup(self):
        """이번 실행에서 쓴 파일(과 새로 만든 디렉터리)을 제거"""
        for entry in self.files:
            (self.directory / entry.name).unlink(missing_ok=True)
        self.files = []
        if self._created_directory and self.directory.exists() and not any(self.directory.iterdir()):
            shutil.rmtree(self.directory)
        logger.info(f"부분 출력 제거: {self.directory}")
