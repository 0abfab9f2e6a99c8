"""
핵심 모듈
"""

from .exceptions import ConfigError, NumericalError, SimulatorError, SweepPartialFailure

__all__ = ["ConfigError", "NumericalError", "SimulatorError", "SweepPartialFailure"]
