"""
물리 모델 모듈
"""

from .fock import DensityMatrix, FockSpace, Operator
from .observables import PhononDistribution, WignerGrid
from .lindblad import LindbladChannel, Liouvillian, RateChain

__all__ = [
    "DensityMatrix",
    "FockSpace",
    "Operator",
    "PhononDistribution",
    "WignerGrid",
    "LindbladChannel",
    "Liouvillian",
    "RateChain",
]
