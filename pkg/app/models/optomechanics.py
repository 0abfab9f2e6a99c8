"""
3모드 광역학 모델
급수 함수 f1/f2, g(x,y), 유효 결합 α/α_n, 위상 φ_n, 에너지 이동, 전체 해밀토니안과 폴라론 변환을 제공합니다.
모든 값은 g = 1 단위입니다.
"""

import logging
import math
from typing import Callable, Dict, NamedTuple, Optional, Tuple

from scipy.linalg import expm

from app.core.exceptions import FactorialRangeError, PoleError, SeriesDivergenceError
from app.models.fock import FockSpace, Operator, annihilation, embed
from app.schemas.params import AlphaConvention, SeriesControl, SystemParams

logger = logging.getLogger(__name__)

POLE_TOL = 1e-12
MAX_FACTORIAL_ARGUMENT = 170
CAVITY_DIM = 2


class SeriesValue(NamedTuple):
    """수렴한 부분합과 처음으로 버린 항의 크기"""

    value: float
    dropped: float


class PhaseValue(NamedTuple):
    """φ_n 값과 k 급수 수렴 여부"""

    value: float
    converged: bool


class AlphaPair(NamedTuple):
    derived: float
    literal: float


def _sum_series(first: float, ratio: Callable[[int], float], ctrl: SeriesControl, label: str) -> SeriesValue:
    """t_{m+1} = t_m · ratio(m) 로 정의되는 교대 급수를 상대 절단 허용치까지 합산"""
    total = 0.0
    term = first
    for m in range(ctrl.max_terms):
        total += term
        following = term * ratio(m)
        if following == 0.0 or abs(following) <= ctrl.tail_tol * abs(total):
            return SeriesValue(total, abs(following))
        term = following
    raise SeriesDivergenceError(
        f"{label} 급수가 {ctrl.max_terms}항 안에 수렴하지 않았습니다",
        details={"partial_sum": total, "last_term": abs(term)},
    )


def _check_pole(denominator: float, label: str):
    if abs(denominator) < POLE_TOL:
        raise PoleError(f"{label} 에서 극점에 도달했습니다 (분모 = {denominator!r})")


def f1_element(n: int, eta: float, ctrl: SeriesControl) -> SeriesValue:
    """⟨n|f₁(cc†)|n⟩ = Σ_m (−1)^m η^{2m} (n+m)!/(n!(m!)²)"""
    eta_sq = eta * eta
    return _sum_series(1.0, lambda m: -eta_sq * (n + m + 1) / (m + 1) ** 2, ctrl, f"f1(n={n})")


def f2_element(n: int, eta: float, ctrl: SeriesControl) -> SeriesValue:
    """⟨n|f₂(cc†)|n⟩ = Σ_m (−1)^m η^{2m+1} (n+m)!/(n! m! (m+1)!)"""
    eta_sq = eta * eta
    return _sum_series(
        eta, lambda m: -eta_sq * (n + m + 1) / ((m + 1) * (m + 2)), ctrl, f"f2(n={n})"
    )


def g_func(x: int, y: int, eta: float) -> float:
    """
    g(x,y) = (−1)^x η^{2x} (x+y+1)! / (x!(x+1)!(y+1)!)

    계승 없이 곱셈 누적으로 계산합니다: Π_{i=1..x} [−η²(y+1+i)/(i(i+1))]
    """
    if x < 0 or y < 0:
        raise ValueError(f"g(x,y)의 인자는 음이 아니어야 합니다: x={x}, y={y}")
    if x + y + 1 > MAX_FACTORIAL_ARGUMENT:
        raise FactorialRangeError(f"g({x},{y}) 인자가 허용 범위를 넘습니다 (x+y+1 ≤ {MAX_FACTORIAL_ARGUMENT})")
    eta_sq = eta * eta
    value = 1.0
    for i in range(1, x + 1):
        value *= -eta_sq * (y + 1 + i) / (i * (i + 1))
    if not math.isfinite(value):
        raise FactorialRangeError(f"g({x},{y}) 계산 중 범위를 벗어났습니다")
    return value


def _g_column_sum(n: int, eta: float, ctrl: SeriesControl, weight: Callable[[int], float]) -> SeriesValue:
    """Σ_m g(m,n)·w(m). m 에 대해 η^{2m} 로 감쇠하므로 수렴합니다"""
    eta_sq = eta * eta
    total = 0.0
    g_value = 1.0
    for m in range(ctrl.max_terms):
        term = g_value * weight(m)
        total += term
        g_value *= -eta_sq * (n + m + 2) / ((m + 1) * (m + 2))
        following = g_value * weight(m + 1)
        if following == 0.0 or abs(following) <= ctrl.tail_tol * abs(total):
            return SeriesValue(total, abs(following))
    raise SeriesDivergenceError(
        f"Σ_m g(m,{n}) 급수가 {ctrl.max_terms}항 안에 수렴하지 않았습니다",
        details={"partial_sum": total},
    )


def _g_row_window(n: int, eta: float, ctrl: SeriesControl, weight: Callable[[int], float]) -> float:
    """Σ_k g(n,k)·w(k) 를 k = 0…max_terms−1 창에서 합산 (η^{2k} 감쇠가 없어 수렴하지 않음)"""
    return sum(g_func(n, k, eta) * weight(k) for k in range(ctrl.max_terms))


def g_sum(n: int, eta: float, ctrl: SeriesControl) -> SeriesValue:
    """Σ_m g(m,n)"""
    return _g_column_sum(n, eta, ctrl, lambda m: 1.0)


def chi_e(p: SystemParams) -> float:
    """χ_e = J²/(ω_m − Δ_a)"""
    denominator = p.omega_m - p.delta_a
    _check_pole(denominator, "χ_e (Δ_a = ω_m)")
    return p.J ** 2 / denominator


def alpha_bar(p: SystemParams) -> float:
    """α = e^{η²/2} J ε / (Δ_a − ω_m)"""
    denominator = p.delta_a - p.omega_m
    _check_pole(denominator, "α (Δ_a = ω_m)")
    return math.exp(p.eta ** 2 / 2) * p.J * p.eps / denominator


def alpha_prefactor(p: SystemParams, convention: Optional[AlphaConvention] = None) -> float:
    """α_n 전인자: derived = e^{η²/2}Jε/(Δ_a−ω_m), literal = e^{η²/2}ε"""
    convention = convention or p.alpha_convention
    if convention == "derived":
        return alpha_bar(p)
    return math.exp(p.eta ** 2 / 2) * p.eps


def alpha_n(p: SystemParams, n: int, ctrl: SeriesControl, convention: Optional[AlphaConvention] = None) -> float:
    """α_n = 전인자 · η√(n+1) Σ_m g(m,n)"""
    if n < 0:
        raise ValueError(f"준위는 음이 아니어야 합니다: n={n}")
    eta = p.eta
    return alpha_prefactor(p, convention) * eta * math.sqrt(n + 1) * g_sum(n, eta, ctrl).value


def alpha_n_pair(p: SystemParams, n: int, ctrl: SeriesControl) -> AlphaPair:
    """두 규약의 α_n 을 함께 반환"""
    return AlphaPair(
        derived=alpha_n(p, n, ctrl, "derived"),
        literal=alpha_n(p, n, ctrl, "literal"),
    )


def phi_n_detail(p: SystemParams, n: int, ctrl: SeriesControl) -> PhaseValue:
    """
    φ_n = −χ_e − e^{η²}ε² Σ_{m,k} g(m,n)·g(n,k)·[ (m+1)(n+1)(k+1)/Δ_a + η²/(Δ_a−ω_m)
          + η²(n+m+2)(n+k+2)/((Δ_a+ω_m)(n+1)(n+2)) ]

    괄호 안이 m, k 에 대해 분리되므로 이중합은 단일합의 곱으로 계산합니다.
    phi_ordering="swapped" 이면 g(n,k) 대신 g(k,n) 을 씁니다.
    """
    if n < 0:
        raise ValueError(f"준위는 음이 아니어야 합니다: n={n}")
    for denominator, label in (
        (p.delta_a, "φ_n (Δ_a = 0)"),
        (p.delta_a - p.omega_m, "φ_n (Δ_a = ω_m)"),
        (p.delta_a + p.omega_m, "φ_n (Δ_a = −ω_m)"),
    ):
        _check_pole(denominator, label)

    eta = p.eta
    eta_sq = eta * eta
    weights = (
        lambda i: 1.0,
        lambda i: i + 1.0,
        lambda i: n + i + 2.0,
    )
    a0, a1, a2 = (_g_column_sum(n, eta, ctrl, w).value for w in weights)
    if p.phi_ordering == "swapped":
        b0, b1, b2 = a0, a1, a2
        converged = True
    else:
        b0, b1, b2 = (_g_row_window(n, eta, ctrl, w) for w in weights)
        converged = False

    double_sum = (
        (n + 1) / p.delta_a * a1 * b1
        + eta_sq / (p.delta_a - p.omega_m) * a0 * b0
        + eta_sq / ((p.delta_a + p.omega_m) * (n + 1) * (n + 2)) * a2 * b2
    )
    value = -chi_e(p) - math.exp(eta_sq) * p.eps ** 2 * double_sum
    return PhaseValue(value, converged)


def phi_n(p: SystemParams, n: int, ctrl: SeriesControl) -> float:
    """위상 φ_n [g]"""
    return phi_n_detail(p, n, ctrl).value


def ground_energy_shift(p: SystemParams, n: int, ctrl: SeriesControl) -> float:
    """
    H'_0 에서 |g,n⟩ 의 구동 유도 에너지 이동
    −e^{η²}ε² [ f₁(n)²/Δ_a + (n+1) f₂(n+1)²/(Δ_a+ω_m) + n f₂(n)²/(Δ_a−ω_m) ]
    """
    for denominator, label in (
        (p.delta_a, "에너지 이동 (Δ_a = 0)"),
        (p.delta_a - p.omega_m, "에너지 이동 (Δ_a = ω_m)"),
        (p.delta_a + p.omega_m, "에너지 이동 (Δ_a = −ω_m)"),
    ):
        _check_pole(denominator, label)
    eta = p.eta
    f1 = f1_element(n, eta, ctrl).value
    f2 = f2_element(n, eta, ctrl).value
    f2_up = f2_element(n + 1, eta, ctrl).value
    bracket = (
        f1 ** 2 / p.delta_a
        + (n + 1) * f2_up ** 2 / (p.delta_a + p.omega_m)
        + n * f2 ** 2 / (p.delta_a - p.omega_m)
    )
    return -math.exp(eta ** 2) * p.eps ** 2 * bracket


def full_model_spaces(n_c: int) -> Tuple[FockSpace, FockSpace, FockSpace]:
    """a ⊗ b ⊗ c 공간 (공동은 광자 최대 1개)"""
    return FockSpace(CAVITY_DIM), FockSpace(CAVITY_DIM), FockSpace(n_c)


def full_model_operators(n_c: int) -> Dict[str, Operator]:
    """곱공간 위의 a, b, c 소멸 연산자"""
    spaces = full_model_spaces(n_c)
    return {
        name: embed(annihilation(space), spaces, position)
        for position, (name, space) in enumerate(zip(("a", "b", "c"), spaces))
    }


def build_full_hamiltonian(p: SystemParams, n_c: int) -> Operator:
    """
    H = Δ_a a†a + Δ_b b†b + ω_m c†c + g(a†a+b†b)(c+c†) + J(a†b+ab†) + ε(a+a†)

    모든 항을 에르미트 쌍(O + O†)으로 조립하므로 결과는 정확히 에르미트입니다.
    """
    ops = full_model_operators(n_c)
    a, b, c = ops["a"], ops["b"], ops["c"]
    n_a = a.dag() @ a
    n_b = b.dag() @ b
    hopping = a.dag() @ b
    hamiltonian = (
        p.delta_a * n_a
        + p.delta_b * n_b
        + p.omega_m * (c.dag() @ c)
        + (n_a + n_b) @ (c + c.dag())
        + p.J * (hopping + hopping.dag())
        + p.eps * (a + a.dag())
    )
    return Operator(hamiltonian.matrix, hamiltonian.dims, hermitian=True)


def polaron_generator(eta: float, dims: Tuple[int, ...]) -> Operator:
    """S = η(a†a + b†b)(c† − c)"""
    n_c = dims[-1]
    ops = full_model_operators(n_c)
    a, b, c = ops["a"], ops["b"], ops["c"]
    return eta * ((a.dag() @ a + b.dag() @ b) @ (c.dag() - c))


def polaron_transform(hamiltonian: Operator, eta: float, dims: Tuple[int, ...]) -> Operator:
    """e^S H e^{−S} (수치 행렬 지수)"""
    if tuple(dims) != hamiltonian.dims:
        raise ValueError(f"차원 {dims} 이(가) 해밀토니안 차원 {hamiltonian.dims} 와 다릅니다")
    if eta == 0:
        return hamiltonian
    generator = polaron_generator(eta, hamiltonian.dims).matrix
    unitary = expm(generator)
    transformed = unitary @ hamiltonian.matrix @ unitary.conj().T
    transformed = 0.5 * (transformed + transformed.conj().T)
    logger.debug(f"폴라론 변환 완료 (η={eta}, 차원={hamiltonian.dims})")
    return Operator(transformed, hamiltonian.dims, hermitian=True)

