"""
Lindblad 마스터 방정식 모듈
Liouvillian 조립, RK4 시간 전개, 조밀 정상상태, 출생-사망 사슬 정상상태와
3모드 전체 모델 검증을 담당합니다.

벡터화는 행 우선(row-major) 입니다: vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import (
    IntegrationError,
    LiouvillianError,
    NonUniqueSteadyStateError,
    ReducibleChainError,
    SeriesDivergenceError,
    ShapeMismatchError,
    SteadyStateError,
)
from app.models.fock import (
    DensityMatrix,
    FockSpace,
    Operator,
    annihilation,
    partial_trace,
    projector_transfer,
)
from app.models.observables import PhononDistribution
from app.models.optomechanics import build_full_hamiltonian, full_model_operators
from app.schemas.params import EvolveControl, SystemParams
from app.schemas.reports import FullModelReport

logger = logging.getLogger(__name__)

TRACE_PRESERVATION_TOL = 1e-12
NULL_SPACE_GAP = 1e-8
STEADY_RESIDUAL_TOL = 1e-10
DEFAULT_DT_FACTOR = 0.02
MIN_ADAPTIVE_STEP = 1e-12


@dataclass(frozen=True)
class LindbladChannel:
    """감쇠 채널 r·D(O)"""

    rate: float
    jump: Operator

    def __post_init__(self):
        if not self.rate >= 0:
            raise LiouvillianError(f"채널 감쇠율은 음이 아니어야 합니다: rate={self.rate!r}")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """벡터화된 초연산자 (dim² × dim²)"""

    matrix: np.ndarray
    dims: Tuple[int, ...]
    rate_scale: float

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))


class Trajectory(NamedTuple):
    times: np.ndarray
    states: List[DensityMatrix]


def _vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix, dtype=complex).reshape(-1)


def _unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return vector.reshape(dim, dim)


def build_liouvillian(hamiltonian: Optional[Operator], channels: Sequence[LindbladChannel]) -> Liouvillian:
    """
    dρ/dt = −i[H, ρ] + Σ r·D(O)ρ 의 행렬 표현

    L = −i(H⊗I − I⊗Hᵀ) + Σ r[2 O⊗O* − I⊗(O†O)ᵀ − (O†O)⊗I]
    """
    dims = hamiltonian.dims if hamiltonian is not None else (channels[0].jump.dims if channels else None)
    if dims is None:
        raise LiouvillianError("해밀토니안과 채널이 모두 비어 있습니다")
    dim = int(np.prod(dims))
    eye = np.eye(dim)
    matrix = np.zeros((dim * dim, dim * dim), dtype=complex)
    hamiltonian_norm = 0.0
    channel_rate = 0.0

    if hamiltonian is not None:
        if not hamiltonian.hermitian and not np.allclose(hamiltonian.matrix, hamiltonian.matrix.conj().T, atol=1e-12):
            raise LiouvillianError("해밀토니안이 에르미트가 아닙니다")
        h = hamiltonian.matrix
        matrix += -1j * (np.kron(h, eye) - np.kron(eye, h.T))
        hamiltonian_norm = float(np.abs(np.linalg.eigvalsh(h)).max())

    for channel in channels:
        if channel.jump.dims != dims:
            raise ShapeMismatchError(f"채널 차원 {channel.jump.dims} 이(가) 계 차원 {dims} 와 다릅니다")
        if channel.rate == 0:
            continue
        o = channel.jump.matrix
        o_dag_o = o.conj().T @ o
        matrix += channel.rate * (2.0 * np.kron(o, o.conj()) - np.kron(eye, o_dag_o.T) - np.kron(o_dag_o, eye))
        channel_rate = max(channel_rate, 2.0 * channel.rate * float(np.linalg.norm(o_dag_o, 2)))

    rate_scale = hamiltonian_norm + channel_rate
    # 대각합 보존: vec(I)† L = 0
    leak = np.abs(_vec(eye) @ matrix).max()
    if leak > TRACE_PRESERVATION_TOL * max(1.0, rate_scale):
        raise LiouvillianError(f"Liouvillian 이 대각합을 보존하지 않습니다: max|vec(I)†L| = {leak:.3e}")
    return Liouvillian(matrix=matrix, dims=tuple(dims), rate_scale=rate_scale or 1.0)


def _rk4_step(l_matrix: np.ndarray, vector: np.ndarray, h: float) -> np.ndarray:
    k1 = l_matrix @ vector
    k2 = l_matrix @ (vector + 0.5 * h * k1)
    k3 = l_matrix @ (vector + 0.5 * h * k2)
    k4 = l_matrix @ (vector + h * k3)
    return vector + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_state(vector: np.ndarray, dim: int, t: float, trace_tol: float):
    rho = _unvec(vector, dim)
    trace_error = abs(np.trace(rho) - 1.0)
    if trace_error > trace_tol:
        raise IntegrationError(
            f"t={t:.6g} 에서 대각합이 보존되지 않습니다 (|Tr ρ − 1| = {trace_error:.3e}); dt를 줄이십시오",
            details={"time": t, "trace_error": float(trace_error)},
        )
    asymmetry = np.abs(rho - rho.conj().T).max()
    if asymmetry > trace_tol:
        raise IntegrationError(
            f"t={t:.6g} 에서 에르미트성이 깨졌습니다 (max|ρ − ρ†| = {asymmetry:.3e}); dt를 줄이십시오",
            details={"time": t, "asymmetry": float(asymmetry)},
        )


def _snapshot(vector: np.ndarray, dims: Tuple[int, ...], t: float, trace_tol: float) -> DensityMatrix:
    dim = int(np.prod(dims))
    rho = _unvec(vector, dim)
    try:
        return DensityMatrix(0.5 * (rho + rho.conj().T), dims, hermitian_tol=trace_tol, trace_tol=trace_tol)
    except ShapeMismatchError as e:
        raise IntegrationError(f"t={t:.6g} 의 상태가 물리적이지 않습니다: {e.message}") from e


def evolve(
    rho0: DensityMatrix, liouvillian: Liouvillian, ctrl: EvolveControl, dt_factor: float = DEFAULT_DT_FACTOR
) -> Trajectory:
    """
    dρ/dt = Lρ 를 RK4로 적분하여 등간격 시각의 상태들을 반환

    dt 를 주지 않으면 dt = dt_factor / (최대 채널 감쇠율 + ‖H‖) 를 씁니다.
    """
    if rho0.dims != liouvillian.dims:
        raise ShapeMismatchError(f"초기 상태 차원 {rho0.dims} 이(가) Liouvillian 차원 {liouvillian.dims} 와 다릅니다")
    dim = liouvillian.dim
    l_matrix = liouvillian.matrix
    times = np.linspace(0.0, ctrl.t_final, ctrl.n_snapshots)
    step = ctrl.dt or dt_factor / liouvillian.rate_scale

    vector = _vec(rho0.matrix)
    states = [rho0]
    t = 0.0
    for target in times[1:]:
        if ctrl.method == "rk4-fixed":
            n_steps = max(1, int(math.ceil((target - t) / step - 1e-9)))
            h = (target - t) / n_steps
            for _ in range(n_steps):
                vector = _rk4_step(l_matrix, vector, h)
                t += h
                _check_state(vector, dim, t, ctrl.trace_tol)
        else:
            vector, t, step = _adaptive_segment(l_matrix, vector, t, target, step, ctrl, dim)
        t = float(target)
        states.append(_snapshot(vector, liouvillian.dims, t, ctrl.trace_tol))

    logger.debug(f"시간 전개 완료: t_final={ctrl.t_final}, 방법={ctrl.method}, 스냅샷 {len(states)}개")
    return Trajectory(times=times, states=states)


def _adaptive_segment(
    l_matrix: np.ndarray,
    vector: np.ndarray,
    t: float,
    target: float,
    step: float,
    ctrl: EvolveControl,
    dim: int,
) -> Tuple[np.ndarray, float, float]:
    """단계 배가(step doubling) 오차 추정으로 [t, target] 구간을 적분"""
    while target - t > 1e-14 * max(1.0, abs(target)):
        h = min(step, target - t)
        full = _rk4_step(l_matrix, vector, h)
        half = _rk4_step(l_matrix, _rk4_step(l_matrix, vector, 0.5 * h), 0.5 * h)
        error = float(np.abs(half - full).max())
        if error <= ctrl.local_tol:
            vector = half + (half - full) / 15.0
            t += h
            _check_state(vector, dim, t, ctrl.trace_tol)
            if h == step:
                step *= 2.0 if error == 0 else min(2.0, 0.9 * (ctrl.local_tol / error) ** 0.2)
        else:
            step = h * max(0.2, 0.9 * (ctrl.local_tol / error) ** 0.2)
            if step < MIN_ADAPTIVE_STEP:
                raise IntegrationError(f"t={t:.6g} 에서 적응 단계 크기가 하한 아래로 줄었습니다")
    return vector, t, step


def steady_state(liouvillian: Liouvillian) -> DensityMatrix:
    """
    Lρ = 0 의 해 (특이값 분해로 영공간을 구합니다)

    두 번째로 작은 특이값이 max 특이값의 1e-8 배 이하이면 정상상태가 유일하지 않은 것으로 봅니다.
    """
    dim = liouvillian.dim
    _, singular, vh = np.linalg.svd(liouvillian.matrix)
    largest = singular[0]
    if largest == 0 or singular[-2] <= NULL_SPACE_GAP * largest:
        raise NonUniqueSteadyStateError(
            "Liouvillian 영공간이 1차원보다 큽니다",
            details={"sigma_min": float(singular[-1]), "sigma_second": float(singular[-2]), "sigma_max": float(largest)},
        )
    rho = _unvec(vh[-1].conj(), dim)
    trace = np.trace(rho)
    if abs(trace) < 1e-14:
        raise SteadyStateError("영공간 벡터의 대각합이 0입니다")
    rho = rho / trace
    rho = 0.5 * (rho + rho.conj().T)
    residual = float(np.linalg.norm(liouvillian.matrix @ _vec(rho)))
    if residual > STEADY_RESIDUAL_TOL:
        raise SteadyStateError(f"정상상태 잔차가 큽니다: ‖Lρ‖ = {residual:.3e}", details={"residual": residual})
    logger.debug(f"정상상태 계산 완료: 차원={liouvillian.dims}, ‖Lρ‖={residual:.2e}")
    return DensityMatrix(rho, liouvillian.dims)


@dataclass(frozen=True, eq=False)
class RateChain:
    """
    최근접 이웃 출생-사망 사슬

    up_rates[n] 은 n → n+1, down_rates[n] 은 n → n−1 전이율,
    extra_down[n] 은 n → n−1 의 추가(선택적) 전이율입니다.
    tail_ratio 는 절단 이후 이어지는 열 꼬리의 비율이며, 0이면 꼬리가 없습니다.
    """

    up_rates: np.ndarray
    down_rates: np.ndarray
    extra_down: np.ndarray
    tail_ratio: float = 0.0

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.up_rates, self.down_rates, self.extra_down)]
        if len({a.size for a in arrays}) != 1 or arrays[0].size < 2:
            raise ShapeMismatchError("사슬 전이율 배열들은 같은 길이(2 이상)여야 합니다")
        if any((a < 0).any() for a in arrays):
            raise ReducibleChainError("전이율은 음이 아니어야 합니다")
        for name, array in zip(("up_rates", "down_rates", "extra_down"), arrays):
            object.__setattr__(self, name, array)

    @property
    def size(self) -> int:
        return self.up_rates.size

    @property
    def total_down(self) -> np.ndarray:
        return self.down_rates + self.extra_down

    @classmethod
    def engineered(
        cls, gamma_p: float, nbar_p: float, j: int, gamma_j: float, size: int, with_tail: bool = True
    ) -> "RateChain":
        """
        공학적 마스터 방정식의 준위 사슬

        up[n] = γ_p n̄_p (n+1), down[n] = γ_p (n̄_p+1) n, j+1 → j 에 Γ_j 추가.
        """
        if size < j + 2:
            raise ValueError(f"사슬 크기는 j+2 = {j + 2} 이상이어야 합니다: size={size}")
        levels = np.arange(size, dtype=float)
        up = gamma_p * nbar_p * (levels + 1.0)
        up[-1] = 0.0
        down = gamma_p * (nbar_p + 1.0) * levels
        extra = np.zeros(size)
        extra[j + 1] = gamma_j
        ratio = nbar_p / (nbar_p + 1.0) if with_tail else 0.0
        return cls(up, down, extra, tail_ratio=ratio)


def chain_steady_state(chain: RateChain) -> PhononDistribution:
    """상세 균형 p_{n+1}/p_n = up[n]/(down[n+1] + extra[n+1]) 으로 정상 분포를 구합니다"""
    down = chain.total_down
    ratios = np.empty(chain.size - 1)
    for n in range(chain.size - 1):
        up, back = chain.up_rates[n], down[n + 1]
        if back == 0.0:
            raise ReducibleChainError(
                f"{n + 1} → {n} 전이율이 0이어서 사슬이 기약이 아닙니다",
                details={"link": [n, n + 1], "up": float(up)},
            )
        ratios[n] = up / back
    weights = np.concatenate([[1.0], np.cumprod(ratios)])
    r = chain.tail_ratio
    tail = weights[-1] * r / (1.0 - r) if r > 0 else 0.0
    return PhononDistribution(weights / (math.fsum(weights) + tail), tail_ratio=r)


def bond_fluxes(chain: RateChain, dist: PhononDistribution) -> Tuple[np.ndarray, np.ndarray]:
    """각 결합 (n, n+1) 의 (순 흐름, 총 흐름)"""
    p = dist.populations[: chain.size]
    forward = chain.up_rates[:-1] * p[:-1]
    backward = chain.total_down[1:] * p[1:]
    return forward - backward, forward + backward


def solve_engineered_chain(
    gamma_p: float,
    nbar_p: float,
    j: int,
    gamma_j: float,
    tail_tol: float = 1e-12,
    initial_size: int = 32,
    max_size: int = 20000,
) -> PhononDistribution:
    """p_{N_c−1}·(n̄_p+1) < tail_tol 이 될 때까지 사슬 크기를 두 배씩 늘립니다"""
    size = max(initial_size, j + 2)
    while True:
        dist = chain_steady_state(RateChain.engineered(gamma_p, nbar_p, j, gamma_j, size))
        if dist.populations[-1] * (nbar_p + 1.0) < tail_tol:
            logger.debug(f"사슬 정상상태 수렴: N_c={size}, 꼬리={dist.truncation_tail:.2e}")
            return dist
        if size * 2 > max_size:
            raise SeriesDivergenceError(
                f"사슬 크기 {max_size} 안에서 꼬리가 {tail_tol} 아래로 줄지 않았습니다",
                details={"size": size, "last_population": float(dist.populations[-1])},
            )
        size *= 2


def thermal_channels(gamma_p: float, nbar_p: float, c: Operator) -> List[LindbladChannel]:
    """γ_p(n̄_p+1)/2 D(c) + γ_p n̄_p/2 D(c†)"""
    return [
        LindbladChannel(gamma_p * (nbar_p + 1.0) / 2.0, c),
        LindbladChannel(gamma_p * nbar_p / 2.0, c.dag()),
    ]


def engineered_channels(gamma_p: float, nbar_p: float, j: int, gamma_j: float, n_c: int) -> List[LindbladChannel]:
    """유효 포논 마스터 방정식의 채널: 열 채널 + (Γ_j/2) D(c_j), c_j = |j⟩⟨j+1|"""
    space = FockSpace(n_c)
    channels = thermal_channels(gamma_p, nbar_p, annihilation(space))
    channels.append(LindbladChannel(gamma_j / 2.0, projector_transfer(space, j, j + 1)))
    return channels


def engineered_liouvillian(gamma_p: float, nbar_p: float, j: int, gamma_j: float, n_c: int) -> Liouvillian:
    """H = 0 인 유효 포논 Liouvillian"""
    return build_liouvillian(None, engineered_channels(gamma_p, nbar_p, j, gamma_j, n_c))


class FullModelState(NamedTuple):
    rho: DensityMatrix
    phonon_populations: np.ndarray
    cavity_a_vacuum: float
    cavity_b_vacuum: float


def full_model_channels(p: SystemParams, n_c: int) -> List[LindbladChannel]:
    """κ_a/2 D(a) + κ_b/2 D(b) + 역학 열 채널"""
    ops = full_model_operators(n_c)
    channels = [
        LindbladChannel(p.kappa_a_effective / 2.0, ops["a"]),
        LindbladChannel(p.kappa_b / 2.0, ops["b"]),
    ]
    channels.extend(thermal_channels(p.gamma_p, p.nbar_p, ops["c"]))
    return [channel for channel in channels if channel.rate > 0]


def full_model_steady_state(p: SystemParams, n_c: int) -> FullModelState:
    """3모드 전체 마스터 방정식의 정상상태와 부분계 주변 분포"""
    hamiltonian = build_full_hamiltonian(p, n_c)
    liouvillian = build_liouvillian(hamiltonian, full_model_channels(p, n_c))
    rho = steady_state(liouvillian)
    phonon = partial_trace(rho.matrix, rho.dims, keep=2).diagonal().real.copy()
    cavity_a = partial_trace(rho.matrix, rho.dims, keep=0).diagonal().real
    cavity_b = partial_trace(rho.matrix, rho.dims, keep=1).diagonal().real
    logger.info(f"전체 모델 정상상태 계산 완료: N_c={n_c}, ⟨a†a⟩={cavity_a[1]:.3e}, ⟨b†b⟩={cavity_b[1]:.3e}")
    return FullModelState(
        rho=rho,
        phonon_populations=np.clip(phonon, 0.0, None),
        cavity_a_vacuum=float(cavity_a[0]),
        cavity_b_vacuum=float(cavity_b[0]),
    )


def truncated_thermal(nbar_p: float, n_c: int) -> np.ndarray:
    """N_c 에서 잘라 재정규화한 열 분포"""
    if nbar_p == 0:
        populations = np.zeros(n_c)
        populations[0] = 1.0
        return populations
    weights = (nbar_p / (nbar_p + 1.0)) ** np.arange(n_c)
    return weights / math.fsum(weights)


RECONSTRUCTION_NOTE = (
    "전체 모델 채널 집합 κ_a/2 D(a), κ_b/2 D(b), γ_p(n̄_p+1)/2 D(c), γ_p n̄_p/2 D(c†) 는 "
    "표준적인 재구성이며 원 모델에 명시되어 있지 않습니다"
)
SUPPRESSION_THRESHOLD = 0.1
SIDEBAND_HEATING_LIMIT = 1.0


def blue_sideband_ratio(p: SystemParams) -> Optional[float]:
    """ηε/|Δ_a+ω_m|: 1 이상이면 청색 측파대 (a†c†) 가열이 포논 분포를 지배합니다"""
    detuning = abs(p.delta_a + p.omega_m)
    if detuning == 0:
        return None
    return p.eta * p.eps / detuning


def _diagnose(enhanced: bool, suppressed: bool, sideband: Optional[float]) -> Optional[str]:
    if enhanced and suppressed:
        return None
    if sideband is None or sideband >= SIDEBAND_HEATING_LIMIT:
        return "청색 측파대 가열: Δ_a ≈ −ω_m 근처에서 a†c† 과정이 포논 분포를 열 기준보다 위로 밀어냅니다"
    return "열 재충전 γ_p n̄_p 가 구동 유도 소산보다 커서 구조적 특징이 드러나지 않습니다"


def validate_full_model(p: SystemParams, j: int, n_c: int) -> FullModelReport:
    """
    축소 규모 전체 모델 정상상태의 포논 주변 분포를 같은 n̄_p 의 열 분포와 비교합니다.

    점검 항목은 Σ_{n≤j} p_n 의 열 기준 대비 증강과 p_{j+1} 의 10% 이상 억제입니다.
    선택성 근 근처에서는 Δ_a+ω_m ≈ 0.03 이라 ηε/|Δ_a+ω_m| ≫ 1 이고, 청색 측파대 가열 때문에
    p_{j+1} 은 억제되어도 저준위 질량은 열 기준보다 작아집니다. 어느 쪽이든 diagnosis 에 기록됩니다.
    """
    if n_c < j + 2:
        raise ValueError(f"검증 절단 차원은 j+2 = {j + 2} 이상이어야 합니다: n_c={n_c}")
    state = full_model_steady_state(p, n_c)
    phonon = state.phonon_populations
    thermal = truncated_thermal(p.nbar_p, n_c)
    low = math.fsum(phonon[: j + 1])
    thermal_low = math.fsum(thermal[: j + 1])
    ratio = low / thermal_low
    suppression = 1.0 - phonon[j + 1] / thermal[j + 1] if thermal[j + 1] > 0 else 0.0
    enhanced = ratio > 1.0
    suppressed = suppression >= SUPPRESSION_THRESHOLD
    sideband = blue_sideband_ratio(p)
    report = FullModelReport(
        reconstruction_note=RECONSTRUCTION_NOTE,
        n_c=n_c,
        j=j,
        delta_a=p.delta_a,
        nbar_p=p.nbar_p,
        gamma_p=p.gamma_p,
        kappa_a=p.kappa_a_effective,
        kappa_b=p.kappa_b,
        phonon_populations=phonon.tolist(),
        thermal_populations=thermal.tolist(),
        low_level_mass=low,
        thermal_low_level_mass=thermal_low,
        enhancement_ratio=ratio,
        suppression=suppression,
        cavity_a_vacuum=state.cavity_a_vacuum,
        cavity_b_vacuum=state.cavity_b_vacuum,
        enhanced=enhanced,
        suppressed=suppressed,
        blue_sideband_ratio=sideband,
        diagnosis=_diagnose(enhanced, suppressed, sideband),
    )
    if report.diagnosis:
        logger.warning(f"전체 모델 검증: 증강비={ratio:.6f}, 억제={suppression:.4f}, {report.diagnosis}")
    return report
