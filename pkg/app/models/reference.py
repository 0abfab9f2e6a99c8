"""
발표된 기준값
(η, j) 네 조합에 대한 구동 이조 Δ_a 와 정상상태 g²(0), δ[ρ] 값입니다.
"""

from typing import NamedTuple, Optional

DETUNING_TOLERANCE = 0.3
METRIC_TOLERANCE = 0.05


class ReferenceCell(NamedTuple):
    eta: float
    j: int
    delta_a: float
    g2: float
    delta: float


REFERENCE_CELLS = (
    ReferenceCell(eta=0.1, j=1, delta_a=-9.7, g2=0.51, delta=0.15),
    ReferenceCell(eta=0.1, j=2, delta_a=-9.6, g2=0.44, delta=0.18),
    ReferenceCell(eta=0.3, j=1, delta_a=-7.5, g2=0.65, delta=0.22),
    ReferenceCell(eta=0.3, j=2, delta_a=-6.6, g2=0.48, delta=0.23),
)


def reference_cell(eta: float, j: int) -> Optional[ReferenceCell]:
    """η 가 기준 조합과 1e-6 이내로 같으면 해당 칸을 반환"""
    for cell in REFERENCE_CELLS:
        if cell.j == j and abs(cell.eta - eta) < 1e-6:
            return cell
    return None
