"""
정상상태 관측량 모듈
해석적 포논 분포, 위그너 함수, 비가우시안성, 2차 상관함수 g²(0) 와 기준 상태를 계산합니다.

분포는 절단 준위 이후의 꼬리를 기하급수 p_{n+1} = r·p_n 으로 가정하고,
모든 모멘트 합에 그 꼬리를 닫힌 형태로 더합니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.special import xlogy

from app.core.exceptions import DegenerateDistributionError, ShapeMismatchError, UndefinedCorrelationError
from app.models.fock import DensityMatrix
from app.models.optomechanics import alpha_n
from app.schemas.params import AlphaConvention, SeriesControl, SystemParams
from app.schemas.scenario import WignerGridSpec

logger = logging.getLogger(__name__)

DEFAULT_TAIL_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
NEGATIVE_CLIP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhononDistribution:
    """
    절단 Fock 공간 위의 대각 포논 분포

    tail_ratio 가 0 보다 크면 마지막 준위 이후 p_{n+1} = tail_ratio · p_n 꼴의 꼬리가 이어집니다.
    """

    populations: np.ndarray
    tail_ratio: float = 0.0

    def __post_init__(self):
        populations = np.array(self.populations, dtype=float)
        if populations.ndim != 1 or populations.size == 0:
            raise ShapeMismatchError("포논 분포는 비어 있지 않은 1차원 배열이어야 합니다")
        if populations.min() < -NEGATIVE_CLIP_TOL:
            raise DegenerateDistributionError(f"음의 점유 확률이 있습니다: min p_n = {populations.min()!r}")
        if not 0.0 <= self.tail_ratio < 1.0:
            raise DegenerateDistributionError(f"꼬리 비율은 [0, 1) 범위여야 합니다: {self.tail_ratio!r}")
        populations = np.clip(populations, 0.0, None)
        populations.setflags(write=False)
        object.__setattr__(self, "populations", populations)
        object.__setattr__(self, "tail_ratio", float(self.tail_ratio))
        total = self.total
        if not 1.0 - NORMALIZATION_TOL <= total <= 1.0 + NORMALIZATION_TOL:
            raise DegenerateDistributionError(f"분포가 정규화되어 있지 않습니다: Σp = {total!r}")

    @property
    def size(self) -> int:
        return self.populations.size

    @property
    def truncation_tail(self) -> float:
        """절단 이후 생략된 확률 질량 (해석적 꼬리)"""
        r = self.tail_ratio
        return float(self.populations[-1] * r / (1.0 - r)) if r > 0 else 0.0

    @property
    def total(self) -> float:
        return math.fsum(self.populations) + self.truncation_tail


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """위상공간 격자 위의 위그너 함수 값 (values[iy, ix] = W(x_ix, y_iy))"""

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray
    mass: float
    truncation_tail: float = 0.0


class SelectiveRates(NamedTuple):
    """선택적 감쇠 채널 관련 값들"""

    alpha_j: float
    gamma_j: float
    eps_j: float
    varpi_j: float
    rho_00: float


def _geometric_sums(r: float) -> Tuple[float, float, float]:
    """S0 = Σ_{k≥1} r^k, S1 = Σ k r^k, S2 = Σ k² r^k"""
    if r <= 0.0:
        return 0.0, 0.0, 0.0
    one_minus = 1.0 - r
    return r / one_minus, r / one_minus ** 2, r * (1.0 + r) / one_minus ** 3


def mean_phonon(dist: PhononDistribution) -> float:
    """평균 포논 수 n̄ = Σ n p_n (해석적 꼬리 포함)"""
    n = np.arange(dist.size)
    body = math.fsum(n * dist.populations)
    s0, s1, _ = _geometric_sums(dist.tail_ratio)
    q = dist.populations[-1]
    last = dist.size - 1
    return body + q * (last * s0 + s1)


def _factorial_moment(dist: PhononDistribution) -> float:
    """Σ n(n−1) p_n (해석적 꼬리 포함)"""
    n = np.arange(dist.size)
    body = math.fsum(n * (n - 1) * dist.populations)
    s0, s1, s2 = _geometric_sums(dist.tail_ratio)
    q = dist.populations[-1]
    last = dist.size - 1
    # n = last + k 에 대해 n(n−1) = last(last−1) + (2·last−1)k + k²
    return body + q * (last * (last - 1) * s0 + (2 * last - 1) * s1 + s2)


def g2_zero(dist: PhononDistribution) -> float:
    """g²(0) = Σ n(n−1)p_n / (Σ n p_n)²"""
    mean = mean_phonon(dist)
    if mean <= 0.0:
        raise UndefinedCorrelationError("평균 포논 수가 0이면 g²(0)가 정의되지 않습니다")
    return _factorial_moment(dist) / mean ** 2


def _entropy_term(dist: PhononDistribution) -> float:
    """Σ p_n ln p_n (0·ln 0 = 0, 해석적 꼬리 포함)"""
    body = math.fsum(xlogy(dist.populations, dist.populations))
    q = dist.populations[-1]
    r = dist.tail_ratio
    if q <= 0.0 or r <= 0.0:
        return body
    s0, s1, _ = _geometric_sums(r)
    return body + q * math.log(q) * s0 + q * math.log(r) * s1


def non_gaussianity_fock(dist: PhononDistribution) -> float:
    """δ[ρ] = Σ ρ_nn ln ρ_nn + (n̄+1)ln(n̄+1) − n̄ ln n̄"""
    nbar = mean_phonon(dist)
    delta = _entropy_term(dist) + (nbar + 1.0) * math.log1p(nbar) - float(xlogy(nbar, nbar))
    if -NEGATIVE_CLIP_TOL < delta < 0.0:
        return 0.0
    return delta


def _extend(dist: PhononDistribution, size: int) -> np.ndarray:
    """꼬리 비율로 분포를 size 준위까지 연장"""
    if size <= dist.size:
        return dist.populations.copy()
    extra = dist.populations[-1] * dist.tail_ratio ** np.arange(1, size - dist.size + 1)
    return np.concatenate([dist.populations, extra])


def _overlap(first: PhononDistribution, second: PhononDistribution) -> float:
    """Tr(ρ₁ρ₂) = Σ p₁,n p₂,n (두 꼬리의 곱도 포함)"""
    size = max(first.size, second.size)
    p1 = _extend(first, size)
    p2 = _extend(second, size)
    body = math.fsum(p1 * p2)
    rr = first.tail_ratio * second.tail_ratio
    if rr <= 0.0:
        return body
    return body + p1[-1] * p2[-1] * rr / (1.0 - rr)


def non_gaussianity_hs(
    rho: Union[DensityMatrix, PhononDistribution],
    rho_g: Optional[PhononDistribution] = None,
) -> float:
    """δ[ρ] = ½[1 + (Tr ρ_G² − 2 Tr ρ_G ρ)/Tr ρ²] (Hilbert-Schmidt 거리 기반)"""
    if isinstance(rho, DensityMatrix):
        if len(rho.dims) != 1:
            raise ShapeMismatchError(f"단일 모드 밀도 행렬이 필요합니다: dims={rho.dims}")
        if rho_g is None:
            populations = rho.populations
            rho_g = thermal_reference(float(np.dot(np.arange(rho.dim), populations)))
        reference = np.diag(_extend(rho_g, rho.dim)[: rho.dim])
        rho_matrix = rho.matrix
        purity = np.trace(rho_matrix @ rho_matrix).real
        cross = np.trace(reference @ rho_matrix).real
        reference_purity = np.trace(reference @ reference).real
    else:
        if rho_g is None:
            rho_g = thermal_reference(mean_phonon(rho))
        purity = _overlap(rho, rho)
        cross = _overlap(rho_g, rho)
        reference_purity = _overlap(rho_g, rho_g)
    return 0.5 * (1.0 + (reference_purity - 2.0 * cross) / purity)


def _auto_size(first_thermal_level: int, amplitude: float, ratio: float, tail_tol: float) -> int:
    """amplitude·ratio^N/(1−ratio) < tail_tol 을 만족하는 최소 N (하한 first_thermal_level)"""
    if ratio <= 0.0 or amplitude <= 0.0:
        return first_thermal_level
    needed = math.log(tail_tol * (1.0 - ratio) / amplitude) / math.log(ratio)
    return max(first_thermal_level, int(math.ceil(needed)))


def thermal_reference(nbar: float, n_c: Optional[int] = None, tail_tol: float = DEFAULT_TAIL_TOL) -> PhononDistribution:
    """같은 평균 점유수를 갖는 열 상태 p_n = n̄^n/(n̄+1)^{n+1}"""
    if nbar < 0:
        raise ValueError(f"평균 점유수는 음이 아니어야 합니다: n̄={nbar}")
    ratio = nbar / (nbar + 1.0)
    size = n_c or _auto_size(2, 1.0 / (nbar + 1.0), ratio, tail_tol)
    populations = ratio ** np.arange(size) / (nbar + 1.0)
    return PhononDistribution(populations, tail_ratio=ratio)


def fock_distribution(level: int, n_c: Optional[int] = None) -> PhononDistribution:
    """Fock 상태 |level⟩ 의 분포"""
    size = n_c or level + 2
    if not 0 <= level < size:
        raise ValueError(f"준위 {level} 이(가) 범위 [0, {size}) 밖입니다")
    populations = np.zeros(size)
    populations[level] = 1.0
    return PhononDistribution(populations)


def mixture(first: PhononDistribution, second: PhononDistribution, weight: float) -> PhononDistribution:
    """(1−weight)·first + weight·second"""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"혼합 가중치는 [0, 1] 범위여야 합니다: {weight}")
    size = max(first.size, second.size)
    p1 = (1.0 - weight) * _extend(first, size)
    p2 = weight * _extend(second, size)
    if first.tail_ratio == second.tail_ratio or p1[-1] == 0.0:
        ratio = second.tail_ratio if p1[-1] == 0.0 else first.tail_ratio
    elif p2[-1] == 0.0:
        ratio = first.tail_ratio
    else:
        raise ValueError("꼬리 비율이 다른 두 분포의 혼합은 단일 기하 꼬리로 표현할 수 없습니다")
    return PhononDistribution(p1 + p2, tail_ratio=ratio)


def engineered_populations(
    gamma_p: float,
    nbar_p: float,
    j: int,
    gamma_j: float,
    n_c: Optional[int] = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> PhononDistribution:
    """
    선택적 감쇠율 Γ_j = 2α_j²/κ_b 가 주어졌을 때의 정상상태 점유 확률

    ρ_nn = ζ_n ρ₀₀ (n ≤ j), ζ_n ϖ_j ρ₀₀ (n > j)
    ζ_n = (n̄_p/(n̄_p+1))^n, ϖ_j = γ_p(j+1)/(γ_p(j+1)+ε_j), ε_j = Γ_j/(n̄_p+1)
    """
    zeta, varpi, rho_00 = _population_constants(gamma_p, nbar_p, j, gamma_j)
    size = n_c or _auto_size(j + 2, varpi * rho_00, zeta, tail_tol)
    if size < j + 2:
        raise ValueError(f"절단 차원은 j+2 = {j + 2} 이상이어야 합니다: n_c={size}")
    levels = np.arange(size)
    populations = rho_00 * zeta ** levels
    populations[levels > j] *= varpi
    return PhononDistribution(populations, tail_ratio=zeta)


def _population_constants(gamma_p: float, nbar_p: float, j: int, gamma_j: float) -> Tuple[float, float, float]:
    """(ζ₁, ϖ_j, ρ₀₀)"""
    if j < 0:
        raise ValueError(f"목표 준위는 음이 아니어야 합니다: j={j}")
    zeta = nbar_p / (nbar_p + 1.0)
    eps_j = gamma_j / (nbar_p + 1.0)
    denominator = gamma_p * (j + 1) + eps_j
    if denominator == 0.0:
        raise DegenerateDistributionError("γ_p(j+1) + ε_j = 0 이므로 정상 분포가 정의되지 않습니다")
    varpi = gamma_p * (j + 1) / denominator
    zeta_next = zeta ** (j + 1)
    rho_00 = 1.0 / ((nbar_p + 1.0) * (1.0 - zeta_next + varpi * zeta_next))
    return zeta, varpi, rho_00


def selective_rates(
    p: SystemParams, j: int, ctrl: SeriesControl, convention: Optional[AlphaConvention] = None
) -> SelectiveRates:
    """α_j, Γ_j, ε_j, ϖ_j, ρ₀₀ (α_n 규약별)"""
    alpha_j = alpha_n(p, j, ctrl, convention)
    gamma_j = 2.0 * alpha_j ** 2 / p.kappa_b
    _, varpi, rho_00 = _population_constants(p.gamma_p, p.nbar_p, j, gamma_j)
    return SelectiveRates(
        alpha_j=alpha_j,
        gamma_j=gamma_j,
        eps_j=gamma_j / (p.nbar_p + 1.0),
        varpi_j=varpi,
        rho_00=rho_00,
    )


def analytic_populations(
    p: SystemParams,
    j: int,
    ctrl: SeriesControl,
    n_c: Optional[int] = None,
    convention: Optional[AlphaConvention] = None,
) -> PhononDistribution:
    """공학적 마스터 방정식의 해석적 정상상태 포논 분포"""
    rates = selective_rates(p, j, ctrl, convention)
    return engineered_populations(p.gamma_p, p.nbar_p, j, rates.gamma_j, n_c)


def laguerre(n: int, x):
    """라게르 다항식 L_n(x), (k+1)L_{k+1} = (2k+1−x)L_k − k L_{k−1}"""
    if n < 0:
        raise ValueError(f"차수는 음이 아니어야 합니다: n={n}")
    x = np.asarray(x, dtype=float)
    previous = np.ones_like(x)
    if n == 0:
        return previous if previous.ndim else float(previous)
    current = 1.0 - x
    for k in range(1, n):
        previous, current = current, ((2 * k + 1 - x) * current - k * previous) / (k + 1)
    return current if current.ndim else float(current)


def wigner(dist: PhononDistribution, spec: WignerGridSpec, mass_tol: float = 1e-4) -> WignerGrid:
    """
    W(ξ) = (2/π) Σ_n (−1)^n e^{−2|ξ|²} ρ_nn L_n(4|ξ|²)

    e^{−x/2}L_n(x) 를 직접 점화하여 큰 |ξ| 에서의 넘침을 피합니다.
    """
    x_axis = np.linspace(spec.xmin, spec.xmax, spec.nx)
    y_axis = np.linspace(spec.ymin, spec.ymax, spec.ny)
    xx, yy = np.meshgrid(x_axis, y_axis, indexing="xy")
    s = 4.0 * (xx ** 2 + yy ** 2)

    weight = np.exp(-0.5 * s)
    previous = weight
    total = dist.populations[0] * previous
    if dist.size > 1:
        current = weight * (1.0 - s)
        total = total - dist.populations[1] * current
        for k in range(1, dist.size - 1):
            previous, current = current, ((2 * k + 1 - s) * current - k * previous) / (k + 1)
            total = total + (-1) ** (k + 1) * dist.populations[k + 1] * current
    values = (2.0 / np.pi) * total

    mass = float(trapezoid(trapezoid(values, x_axis, axis=1), y_axis))
    if abs(mass - 1.0) > mass_tol:
        logger.warning(f"위그너 격자가 확률 질량을 충분히 덮지 못합니다: ∬W = {mass:.6f}")
    return WignerGrid(
        x_axis=x_axis,
        y_axis=y_axis,
        values=values,
        mass=mass,
        truncation_tail=dist.truncation_tail,
    )
