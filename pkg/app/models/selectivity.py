"""
선택성 모듈
φ_j(Δ_a) = 0 을 만족하는 구동 이조를 찾고, 방식의 근사 조건들을 점검합니다.
"""

import logging
import math
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from app.core.exceptions import BracketingError, InvalidBracketError, PoleError, RootNotConvergedError
from app.models.observables import selective_rates
from app.models.optomechanics import alpha_n, ground_energy_shift, phi_n_detail
from app.models.reference import DETUNING_TOLERANCE, reference_cell
from app.schemas.params import SeriesControl, SystemParams
from app.schemas.reports import ConditionCheck, ConditionFlag, LevelEntry, SelectivityReport

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-9
MAX_ITERATIONS = 200
POLE_MARGIN = 0.01
BRACKET_HALF_WIDTH = 0.5
SCAN_POINTS = 400
OK_THRESHOLD = 0.2
WARN_THRESHOLD = 0.5
EXTRA_LEVELS = 5
# 이 폭 이하로 이분한 뒤 할선법으로 다듬습니다
BISECTION_WIDTH = 1e-6


class RootResult(NamedTuple):
    root: float
    residual: float
    iterations: int


def find_root(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = ROOT_TOL,
    max_iter: int = MAX_ITERATIONS,
) -> RootResult:
    """이분법으로 구간을 좁힌 뒤 구간을 유지하는 할선 단계로 |f| < tol 까지 다듬습니다"""
    if not lo < hi:
        raise InvalidBracketError(f"구간 하한이 상한보다 작아야 합니다: ({lo}, {hi})")
    f_lo, f_hi = func(lo), func(hi)
    if f_lo == 0.0:
        return RootResult(lo, 0.0, 0)
    if f_hi == 0.0:
        return RootResult(hi, 0.0, 0)
    if f_lo * f_hi > 0:
        raise BracketingError(
            f"구간 ({lo}, {hi}) 양 끝에서 부호가 바뀌지 않습니다: f = ({f_lo:.6g}, {f_hi:.6g})",
            details={"bracket": [lo, hi], "values": [f_lo, f_hi]},
        )

    for iteration in range(1, max_iter + 1):
        if hi - lo > BISECTION_WIDTH:
            candidate = 0.5 * (lo + hi)
        else:
            candidate = hi - f_hi * (hi - lo) / (f_hi - f_lo)
            if not lo < candidate < hi:
                candidate = 0.5 * (lo + hi)
        value = func(candidate)
        if abs(value) < tol:
            return RootResult(candidate, abs(value), iteration)
        if (value < 0) == (f_lo < 0):
            lo, f_lo = candidate, value
        else:
            hi, f_hi = candidate, value
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(lo)):
            break

    best, best_value = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    raise RootNotConvergedError(
        f"{max_iter}회 안에 |f| < {tol} 에 도달하지 못했습니다 (최선 |f| = {abs(best_value):.3e})",
        details={"best": best, "residual": abs(best_value)},
    )


def poles(p: SystemParams) -> Tuple[float, float, float]:
    """φ_n 의 극점 Δ_a ∈ {−ω_m, 0, ω_m}"""
    return (-p.omega_m, 0.0, p.omega_m)


def detuning_phase(p: SystemParams, j: int, ctrl: SeriesControl) -> Callable[[float], float]:
    """Δ_a ↦ φ_j(Δ_a)"""

    def phase(delta_a: float) -> float:
        return phi_n_detail(p.model_copy(update={"delta_a": float(delta_a)}), j, ctrl).value

    return phase


def default_bracket(
    p: SystemParams,
    j: int,
    half_width: float = BRACKET_HALF_WIDTH,
    pole_margin: float = POLE_MARGIN,
) -> Tuple[float, float]:
    """기준 Δ_a (없으면 현재 Δ_a) ± half_width, 극점은 pole_margin 만큼 피해서 자릅니다"""
    cell = reference_cell(p.eta, j)
    seed = cell.delta_a if cell is not None else p.delta_a
    lo, hi = seed - half_width, seed + half_width
    for pole in poles(p):
        if lo < pole < hi:
            if pole < seed:
                lo = pole + pole_margin
            else:
                hi = pole - pole_margin
    return lo, hi


def locate_bracket(
    phase: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = SCAN_POINTS,
) -> Tuple[float, float]:
    """구간을 균등 탐색해 중심에 가장 가까운 부호 변화 구간을 찾습니다 (국소 탐색)"""
    grid = np.linspace(lo, hi, points)
    values = np.array([phase(x) for x in grid])
    changes = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]
    if changes.size == 0:
        raise BracketingError(
            f"구간 ({lo:.6g}, {hi:.6g}) 안에서 φ_j 의 부호 변화를 찾지 못했습니다",
            details={"bracket": [lo, hi], "values": [float(values[0]), float(values[-1])]},
        )
    center = 0.5 * (lo + hi)
    nearest = min(changes, key=lambda i: abs(0.5 * (grid[i] + grid[i + 1]) - center))
    return float(grid[nearest]), float(grid[nearest + 1])


def _flag(value: float, ok_threshold: float, warn_threshold: float) -> ConditionFlag:
    if value < ok_threshold:
        return "OK"
    if value < warn_threshold:
        return "WARN"
    return "FAIL"


def _safe_ratio(numerator: float, denominator: float) -> float:
    return abs(numerator) / abs(denominator) if denominator != 0 else math.inf


def condition_ratios(p: SystemParams, j: int, ctrl: SeriesControl) -> List[Tuple[str, float]]:
    """J/|Δa−Δb|, ε/|Δa|, ηε/|Δa−ω_m|, ηε/|Δa+ω_m|, |α_j|/κ_b"""
    eta_eps = p.eta * p.eps
    return [
        ("J/|delta_a-delta_b|", _safe_ratio(p.J, p.delta_a - p.delta_b)),
        ("eps/|delta_a|", _safe_ratio(p.eps, p.delta_a)),
        ("eta*eps/|delta_a-omega_m|", _safe_ratio(eta_eps, p.delta_a - p.omega_m)),
        ("eta*eps/|delta_a+omega_m|", _safe_ratio(eta_eps, p.delta_a + p.omega_m)),
        ("|alpha_j|/kappa_b", _safe_ratio(alpha_n(p, j, ctrl), p.kappa_b)),
    ]


def audit_conditions(
    p: SystemParams,
    j: int,
    ctrl: SeriesControl,
    ok_threshold: float = OK_THRESHOLD,
    warn_threshold: float = WARN_THRESHOLD,
) -> SelectivityReport:
    """현재 Δ_a 에서 근사 조건 비율과 상태 절단 비율 ζ_{j+1}ϖ_j/ζ_j 을 판정합니다"""
    conditions = [
        ConditionCheck(name=name, value=value, flag=_flag(value, ok_threshold, warn_threshold))
        for name, value in condition_ratios(p, j, ctrl)
    ]
    zeta = p.nbar_p / (p.nbar_p + 1.0)
    truncation = {
        convention: zeta * selective_rates(p, j, ctrl, convention).varpi_j
        for convention in ("derived", "literal")
    }
    failed = [check.name for check in conditions if check.flag == "FAIL"]
    if failed:
        logger.warning(f"근사 조건 FAIL (j={j}, Δ_a={p.delta_a}): {', '.join(failed)}")
    return SelectivityReport(
        j=j,
        alpha_convention=p.alpha_convention,
        phi_ordering=p.phi_ordering,
        audited_delta_a=p.delta_a,
        series_max_terms=ctrl.max_terms,
        conditions=conditions,
        truncation_ratio=truncation,
        truncation_flag={k: _flag(v, ok_threshold, warn_threshold) for k, v in truncation.items()},
        thresholds={"ok": ok_threshold, "warn": warn_threshold},
    )


def level_table(p: SystemParams, j: int, ctrl: SeriesControl, extra_levels: int = EXTRA_LEVELS) -> Tuple[List[LevelEntry], bool]:
    """n = 0 … j+extra_levels 의 (α_n, φ_n, |φ_n|/|α_n|, 에너지 이동) 와 φ 급수 수렴 여부"""
    entries = []
    converged = True
    for n in range(j + extra_levels + 1):
        alpha = alpha_n(p, n, ctrl)
        phase = phi_n_detail(p, n, ctrl)
        converged = converged and phase.converged
        entries.append(
            LevelEntry(
                n=n,
                alpha_n=alpha,
                phi_n=phase.value,
                phi_over_alpha=abs(phase.value) / abs(alpha) if alpha != 0 else None,
                energy_shift=ground_energy_shift(p, n, ctrl),
                is_target=(n == j),
            )
        )
    return entries, converged


def _check_bracket(p: SystemParams, bracket: Tuple[float, float]):
    lo, hi = bracket
    if not lo < hi:
        raise InvalidBracketError(f"구간 하한이 상한보다 작아야 합니다: ({lo}, {hi})")
    inside = [pole for pole in poles(p) if lo <= pole <= hi]
    if inside:
        raise InvalidBracketError(
            f"구간 ({lo}, {hi}) 안에 φ_n 의 극점 Δ_a = {inside} 이(가) 있습니다",
            details={"bracket": [lo, hi], "poles": inside},
        )


def solve_detuning(
    p: SystemParams,
    j: int,
    ctrl: SeriesControl,
    bracket: Optional[Tuple[float, float]] = None,
    tol: float = ROOT_TOL,
    max_iter: int = MAX_ITERATIONS,
    half_width: float = BRACKET_HALF_WIDTH,
    pole_margin: float = POLE_MARGIN,
    scan_points: int = SCAN_POINTS,
    ok_threshold: float = OK_THRESHOLD,
    warn_threshold: float = WARN_THRESHOLD,
    phase: Optional[Callable[[float], float]] = None,
) -> SelectivityReport:
    """
    φ_j(Δ_a) = 0 인 Δ_a 를 구하고 근에서의 전체 리포트를 작성합니다.

    bracket 이 주어지면 그대로 쓰고 (양 끝 부호가 같으면 BracketingError),
    없으면 기준 Δ_a 주변 기본 구간을 탐색해 부호 변화 구간을 찾습니다.
    phase 를 주면 φ_j 대신 그 함수의 근을 구합니다.
    """
    phase = phase or detuning_phase(p, j, ctrl)
    if bracket is not None:
        _check_bracket(p, bracket)
        lo, hi = bracket
        scan_origin = None
    else:
        scan_origin = default_bracket(p, j, half_width, pole_margin)
        lo, hi = locate_bracket(phase, *scan_origin, points=scan_points)

    try:
        result = find_root(phase, lo, hi, tol=tol, max_iter=max_iter)
    except PoleError as e:
        raise InvalidBracketError(f"구간 ({lo}, {hi}) 평가 중 극점에 도달했습니다: {e.message}") from e
    logger.info(f"선택성 근 발견: j={j}, Δ_a={result.root:.12g}, |φ_j|={result.residual:.2e}, 반복 {result.iterations}회")

    at_root = p.model_copy(update={"delta_a": result.root})
    report = audit_conditions(at_root, j, ctrl, ok_threshold, warn_threshold)
    levels, converged = level_table(at_root, j, ctrl)
    if not converged:
        logger.warning(f"φ_n k 급수가 {ctrl.max_terms}항 창에서 수렴하지 않았습니다 (phi_ordering=printed)")

    cell = reference_cell(p.eta, j)
    updates = {
        "root_found": True,
        "delta_a_root": result.root,
        "residual": result.residual,
        "iterations": result.iterations,
        "bracket": scan_origin or (lo, hi),
        "phi_at_bracket": (phase(lo), phase(hi)),
        "levels": levels,
        "phi_converged": converged,
    }
    if cell is not None:
        deviation = result.root - cell.delta_a
        updates.update(
            reference_delta_a=cell.delta_a,
            reference_deviation=deviation,
            within_reference_tolerance=abs(deviation) <= DETUNING_TOLERANCE,
        )
    return report.model_copy(update=updates)


def unsolved_report(
    p: SystemParams,
    j: int,
    ctrl: SeriesControl,
    error: BracketingError,
    ok_threshold: float = OK_THRESHOLD,
    warn_threshold: float = WARN_THRESHOLD,
) -> SelectivityReport:
    """근을 찾지 못했을 때 현재 Δ_a 의 점검 결과와 구간 끝 φ_j 값을 담은 리포트"""
    report = audit_conditions(p, j, ctrl, ok_threshold, warn_threshold)
    levels, converged = level_table(p, j, ctrl)
    bracket = error.details.get("bracket")
    values = error.details.get("values")
    cell = reference_cell(p.eta, j)
    return report.model_copy(
        update={
            "root_found": False,
            "bracket": tuple(bracket) if bracket else None,
            "phi_at_bracket": tuple(values) if values else None,
            "levels": levels,
            "phi_converged": converged,
            "reference_delta_a": cell.delta_a if cell else None,
        }
    )
