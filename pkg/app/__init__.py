"""
선택적 비고전 포논 정상상태 시뮬레이터
3모드 광역학계의 공학적 마스터 방정식 풀이 및 정상상태 분석 도구
"""

__version__ = "1.0.0"
