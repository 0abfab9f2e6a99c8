"""
CLI 메인 진입점
selective-phonon-sim - 선택적 소산으로 준비되는 비가우시안 포논 정상상태 시뮬레이터
"""

import logging

from app.config.settings import get_settings
from app.cli import main

# 설정 로드
settings = get_settings()

# 로깅 설정
logging.basicConfig(
    level=getattr(logging, settings.log_level),
    format=settings.log_format
)
logger = logging.getLogger(__name__)


if __name__ == "__main__":
    logger.debug(f"{settings.app_name} {settings.app_version} 시작 (환경: {settings.app_env})")
    raise SystemExit(main())
