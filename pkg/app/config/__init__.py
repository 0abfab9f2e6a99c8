"""
설정 모듈
"""

from .settings import Settings, get_settings, get_settings_by_env

__all__ = ["Settings", "get_settings", "get_settings_by_env"]
