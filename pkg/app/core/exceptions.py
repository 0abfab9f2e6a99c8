"""
예외 모듈
모든 오류는 error_code(문자열)와 CLI 종료 코드를 함께 가집니다.
"""

from typing import Any, Dict, Optional


class SimulatorError(Exception):
    """시뮬레이터 기본 예외"""

    error_code: str = "SIMULATOR_ERROR"
    exit_code: int = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ConfigError(SimulatorError):
    """설정 스키마 또는 물리적 불변식 위반"""

    error_code = "CONFIG_ERROR"
    exit_code = 2


class OutputPathError(ConfigError):
    """출력 경로를 만들거나 쓸 수 없음"""

    error_code = "OUTPUT_PATH_ERROR"


class NumericalError(SimulatorError):
    """수치 계산 실패"""

    error_code = "NUMERICAL_ERROR"
    exit_code = 3


class InvalidSpaceError(NumericalError):
    error_code = "INVALID_SPACE"


class LevelIndexError(NumericalError, IndexError):
    error_code = "LEVEL_OUT_OF_RANGE"


class ShapeMismatchError(NumericalError):
    error_code = "SHAPE_MISMATCH"


class SeriesDivergenceError(NumericalError):
    error_code = "SERIES_DIVERGENCE"


class PoleError(NumericalError):
    """공명(극점)에서의 평가"""

    error_code = "POLE"


class FactorialRangeError(NumericalError, OverflowError):
    error_code = "FACTORIAL_RANGE"


class BracketingError(NumericalError):
    """구간 양 끝에서 부호 변화가 없음"""

    error_code = "NO_SIGN_CHANGE"


class InvalidBracketError(NumericalError):
    """구간 내부에 극점이 존재"""

    error_code = "INVALID_BRACKET"


class RootNotConvergedError(NumericalError):
    error_code = "ROOT_NOT_CONVERGED"


class LiouvillianError(NumericalError):
    error_code = "LIOUVILLIAN"


class IntegrationError(NumericalError):
    """시간 전개 중 대각합/에르미트성 이탈 (dt가 너무 큼)"""

    error_code = "INTEGRATION_FAILURE"


class NonUniqueSteadyStateError(NumericalError):
    error_code = "NON_UNIQUE_STEADY_STATE"


class SteadyStateError(NumericalError):
    error_code = "STEADY_STATE"


class ReducibleChainError(NumericalError):
    error_code = "REDUCIBLE_CHAIN"


class DegenerateDistributionError(NumericalError):
    error_code = "DEGENERATE_DISTRIBUTION"


class UndefinedCorrelationError(NumericalError):
    error_code = "UNDEFINED_CORRELATION"


class SweepPartialFailure(SimulatorError):
    """스윕 일부 지점 실패"""

    error_code = "PARTIAL_SWEEP_FAILURE"
    exit_code = 4
