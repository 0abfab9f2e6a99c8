"""
CLI 하위 명령 처리기
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, Optional

from app.core.dependencies import get_scenario_service, get_sweep_service
from app.core.exceptions import ConfigError, OutputPathError, SimulatorError
from app.schemas.common import ErrorResponse, StatusResponse
from app.schemas.scenario import ScenarioConfig, parse_config
from app.services.scenario_service import COMMAND_OUTPUTS

logger = logging.getLogger(__name__)

EXIT_OK = 0


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    """--config 파일(없으면 기본값)을 읽고 --alpha-convention 을 덮어씁니다"""
    if args.config is None:
        cfg = parse_config("{}")
    else:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"설정 파일을 읽을 수 없습니다: {args.config} ({e.strerror})") from e
        cfg = parse_config(text)
    if args.alpha_convention is not None:
        params = cfg.params.model_copy(update={"alpha_convention": args.alpha_convention})
        cfg = cfg.model_copy(update={"params": params})
    return cfg


def _output_dir(args: argparse.Namespace, cfg: ScenarioConfig) -> Path:
    if args.out is not None:
        return Path(args.out)
    if cfg.output_dir is not None:
        return Path(cfg.output_dir)
    raise ConfigError("출력 디렉터리가 필요합니다: --out 또는 설정의 output_dir")


def _emit(response: StatusResponse):
    sys.stdout.write(response.model_dump_json(indent=2) + "\n")


def run_pipeline(args: argparse.Namespace) -> int:
    """
    시나리오 파이프라인 실행 (solve-detuning, steady-state, wigner, metrics, validate-full, run)

    - **--config**: 시나리오 JSON 설정
    - **--out**: 출력 디렉터리
    - **--alpha-convention**: α_n 규약 덮어쓰기 (derived | literal)
    """
    cfg = load_config(args)
    out_dir = _output_dir(args, cfg)
    outputs = COMMAND_OUTPUTS.get(args.command)
    manifest = get_scenario_service().run_scenario(cfg, out_dir, command=args.command, outputs=outputs)
    _emit(
        StatusResponse(
            command=args.command,
            message=f"'{args.command}' 완료: {len(manifest.files)}개 파일",
            output_dir=str(out_dir),
            files=[f.name for f in manifest.files] + ["manifest.json"],
        )
    )
    return EXIT_OK


def run_sweep(args: argparse.Namespace) -> int:
    """
    매개변수 스윕 실행

    - **--parallel**: 작업자 수 (기본값: 사용 가능한 CPU 수)
    """
    cfg = load_config(args)
    out_dir = _output_dir(args, cfg)
    manifest = get_sweep_service().sweep(cfg, out_dir, parallel=args.parallel)
    _emit(
        StatusResponse(
            command=args.command,
            message=f"스윕 완료: {len(manifest.points)}개 지점",
            output_dir=str(out_dir),
            files=[f.name for f in manifest.files] + ["manifest.json"],
        )
    )
    return EXIT_OK


HANDLERS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "solve-detuning": run_pipeline,
    "steady-state": run_pipeline,
    "wigner": run_pipeline,
    "metrics": run_pipeline,
    "validate-full": run_pipeline,
    "run": run_pipeline,
    "sweep": run_sweep,
}


def dispatch(args: argparse.Namespace) -> int:
    """처리기 실행 후 종료 코드 반환 (0 성공, 2 설정 오류, 3 수치 실패, 4 스윕 일부 실패)"""
    handler: Optional[Callable[[argparse.Namespace], int]] = HANDLERS.get(args.command)
    if handler is None:
        raise ConfigError(f"알 수 없는 하위 명령입니다: {args.command}")
    try:
        try:
            return handler(args)
        except OSError as e:
            raise OutputPathError(f"파일 시스템 오류: {e}", details={"path": str(e.filename) if e.filename else None}) from e
    except SimulatorError as e:
        logger.error(f"'{args.command}' 실패: [{e.error_code}] {e.message}")
        error = ErrorResponse(
            command=args.command,
            message=e.message,
            error_code=e.error_code,
            exit_code=e.exit_code,
            details=e.details or None,
        )
        sys.stderr.write(error.model_dump_json(indent=2) + "\n")
        return e.exit_code
