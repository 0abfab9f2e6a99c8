"""
CLI 모듈
"""

import argparse
from typing import List, Optional

from app import __version__
from .commands import HANDLERS, dispatch

SUBCOMMAND_HELP = {
    "solve-detuning": "φ_j = 0 을 만족하는 Δ_a 와 근사 조건 점검 (selectivity.json)",
    "steady-state": "정상상태 포논 분포 (populations.csv)",
    "wigner": "위그너 함수 격자 (wigner.csv)",
    "metrics": "n̄, g²(0), δ[ρ] 를 두 α_n 규약으로 계산 (metrics.json)",
    "validate-full": "축소 규모 3모드 전체 모델 검증 (validation.json)",
    "run": "설정의 outputs 에 있는 모든 출력",
    "sweep": "(η, j) 격자 또는 지점 목록 스윕 (sweep_metrics.csv)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulator",
        description="선택적 소산으로 준비되는 비가우시안 포논 정상상태 시뮬레이터",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        command = sub.add_parser(name, help=SUBCOMMAND_HELP[name])
        command.add_argument("--config", default=None, help="시나리오 JSON 설정 파일 (기본값: 모든 기본 파라미터)")
        command.add_argument("--out", default=None, help="출력 디렉터리")
        command.add_argument(
            "--alpha-convention",
            choices=["derived", "literal"],
            default=None,
            help="α_n 전인자 규약 덮어쓰기",
        )
        command.add_argument("--parallel", type=int, default=None, help="스윕 작업자 수")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return dispatch(args)


__all__ = ["build_parser", "main"]
