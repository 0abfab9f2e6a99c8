"""
시나리오 서비스
선택성 근 → 정상상태 → 관측량 → 파일 기록의 파이프라인을 담당하는 서비스 레이어
"""

import logging
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional

import numpy as np
import pandas as pd

from app import __version__
from app.config.settings import Settings, get_settings
from app.core.exceptions import BracketingError, SimulatorError, UndefinedCorrelationError
from app.models.lindblad import RateChain, chain_steady_state, solve_engineered_chain, validate_full_model
from app.models.observables import (
    PhononDistribution,
    g2_zero,
    mean_phonon,
    non_gaussianity_fock,
    non_gaussianity_hs,
    selective_rates,
    wigner,
)
from app.models.reference import METRIC_TOLERANCE, reference_cell
from app.models.selectivity import audit_conditions, solve_detuning, unsolved_report
from app.schemas.params import AlphaConvention, SeriesControl, SystemParams
from app.schemas.reports import (
    ConventionMetrics,
    FullModelReport,
    MetricsReport,
    ReferenceComparison,
    RunManifest,
    SelectivityReport,
)
from app.schemas.scenario import ScenarioConfig
from app.services.output_writer import OutputWriter

logger = logging.getLogger(__name__)

CONVENTIONS: List[AlphaConvention] = ["derived", "literal"]

# 하위 명령별 출력 필터
COMMAND_OUTPUTS: Dict[str, List[str]] = {
    "solve-detuning": ["selectivity"],
    "steady-state": ["populations"],
    "wigner": ["wigner"],
    "metrics": ["metrics"],
    "validate-full": ["full_model_validation"],
}


class ScenarioOutcome(NamedTuple):
    manifest: RunManifest
    metrics: Optional[MetricsReport]
    selectivity: Optional[SelectivityReport]


class ScenarioService:
    """시나리오 실행 서비스 클래스"""

    def __init__(self, settings: Optional[Settings] = None, ctrl: Optional[SeriesControl] = None):
        self.settings = settings or get_settings()
        self.ctrl = ctrl or SeriesControl(
            max_terms=self.settings.series_max_terms,
            tail_tol=self.settings.series_tail_tol,
        )

    @property
    def thresholds(self) -> Dict[str, float]:
        return {
            "ok": self.settings.condition_ok_threshold,
            "warn": self.settings.condition_warn_threshold,
        }

    def solve_selectivity(self, cfg: ScenarioConfig, params: SystemParams) -> SelectivityReport:
        """φ_j = 0 의 근 (fixed 모드에서는 실패해도 현재 Δ_a 점검 리포트를 반환)"""
        s = self.settings
        try:
            return solve_detuning(
                params,
                cfg.target_j,
                self.ctrl,
                bracket=cfg.bracket,
                tol=s.root_tol,
                max_iter=s.root_max_iter,
                half_width=s.bracket_half_width,
                pole_margin=s.pole_margin,
                scan_points=s.bracket_scan_points,
                ok_threshold=s.condition_ok_threshold,
                warn_threshold=s.condition_warn_threshold,
            )
        except BracketingError as e:
            if cfg.detuning_mode == "solve":
                logger.error(f"선택성 근 찾기 실패: {e.message}")
                raise
            logger.warning(f"선택성 근을 찾지 못해 Δ_a={params.delta_a} 에서 점검만 수행합니다: {e.message}")
            return unsolved_report(
                params, cfg.target_j, self.ctrl, e, s.condition_ok_threshold, s.condition_warn_threshold
            )

    def populations(self, params: SystemParams, j: int, convention: AlphaConvention, n_c: Optional[int] = None) -> PhononDistribution:
        """유효 마스터 방정식의 정상 분포 (출생-사망 사슬 경로)"""
        rates = selective_rates(params, j, self.ctrl, convention)
        if n_c is not None:
            chain = RateChain.engineered(params.gamma_p, params.nbar_p, j, rates.gamma_j, n_c)
            return chain_steady_state(chain)
        return solve_engineered_chain(
            params.gamma_p,
            params.nbar_p,
            j,
            rates.gamma_j,
            tail_tol=self.settings.chain_tail_tol,
            initial_size=self.settings.chain_initial_size,
            max_size=self.settings.chain_max_size,
        )

    def convention_metrics(self, params: SystemParams, j: int, convention: AlphaConvention, n_c: Optional[int] = None) -> ConventionMetrics:
        rates = selective_rates(params, j, self.ctrl, convention)
        dist = self.populations(params, j, convention, n_c)
        nbar = mean_phonon(dist)
        try:
            g2 = g2_zero(dist)
        except UndefinedCorrelationError:
            logger.warning(f"평균 포논 수가 0이어서 g²(0)를 정의할 수 없습니다 (규약 {convention})")
            g2 = None
        return ConventionMetrics(
            alpha_j=rates.alpha_j,
            gamma_j=rates.gamma_j,
            eps_j=rates.eps_j,
            omega_j=rates.varpi_j,
            rho_00=rates.rho_00,
            nbar=nbar,
            g2=g2,
            delta_fock=non_gaussianity_fock(dist),
            delta_hs=non_gaussianity_hs(dist),
            n_c=dist.size,
            truncation_tail=dist.truncation_tail,
        )

    def metrics(self, cfg: ScenarioConfig, params: SystemParams) -> MetricsReport:
        """두 α_n 규약 각각의 관측량과 발표값 비교"""
        j = cfg.target_j
        conventions = {c: self.convention_metrics(params, j, c, cfg.n_c) for c in CONVENTIONS}
        report = MetricsReport(
            j=j,
            eta=params.eta,
            delta_a=params.delta_a,
            detuning_mode=cfg.detuning_mode,
            active_convention=params.alpha_convention,
            conventions=conventions,
            reference=self._compare_reference(params, j, conventions),
        )
        active = conventions[params.alpha_convention]
        logger.info(f"관측량 계산 완료: j={j}, η={params.eta:.4g}, n̄={active.nbar:.6g}, δ={active.delta_fock:.6g}")
        return report

    @staticmethod
    def _compare_reference(
        params: SystemParams, j: int, conventions: Dict[str, ConventionMetrics]
    ) -> Optional[ReferenceComparison]:
        cell = reference_cell(params.eta, j)
        if cell is None:
            return None
        g2_dev = {c: (m.g2 - cell.g2) if m.g2 is not None else float("nan") for c, m in conventions.items()}
        delta_dev = {c: m.delta_fock - cell.delta for c, m in conventions.items()}
        within = {
            c: bool(abs(g2_dev[c]) <= METRIC_TOLERANCE and abs(delta_dev[c]) <= METRIC_TOLERANCE)
            for c in conventions
        }
        matching = [c for c, ok in within.items() if ok]
        note = None
        if not matching:
            note = "어느 규약도 허용오차 안에 들지 않습니다; 스윕 집계의 경향 점검(g² < 1, δ 의 η·j 증가)을 참조하십시오"
            logger.warning(f"발표값과 불일치 (η={params.eta:.3g}, j={j}): g² 편차 {g2_dev}, δ 편차 {delta_dev}")
        return ReferenceComparison(
            g2_reference=cell.g2,
            delta_reference=cell.delta,
            tolerance=METRIC_TOLERANCE,
            g2_deviation=g2_dev,
            delta_deviation=delta_dev,
            within_tolerance=within,
            matching_conventions=matching,
            trends_note=note,
        )

    def full_model_validation(self, cfg: ScenarioConfig, params: SystemParams, root: Optional[float]) -> FullModelReport:
        spec = cfg.validation
        delta_a = spec.delta_a if spec.delta_a is not None else (root if root is not None else params.delta_a)
        scaled = params.model_copy(
            update={
                "nbar_p": spec.nbar_p,
                "gamma_p": spec.gamma_p if spec.gamma_p is not None else params.gamma_p,
                "delta_a": delta_a,
            }
        )
        return validate_full_model(scaled, cfg.target_j, spec.n_c)

    def _write_populations(self, writer: OutputWriter, dist: PhononDistribution):
        frame = pd.DataFrame({"n": np.arange(dist.size), "p_n": dist.populations})
        writer.write_csv("populations.csv", frame)

    def _write_wigner(self, writer: OutputWriter, cfg: ScenarioConfig, dist: PhononDistribution):
        grid = wigner(dist, cfg.wigner, mass_tol=self.settings.wigner_mass_tol)
        xx, yy = np.meshgrid(grid.x_axis, grid.y_axis, indexing="ij")
        frame = pd.DataFrame({"x": xx.ravel(), "y": yy.ravel(), "w": grid.values.T.ravel()})
        writer.write_csv("wigner.csv", frame)
        logger.info(f"위그너 격자 기록: {cfg.wigner.nx}×{cfg.wigner.ny}, ∬W={grid.mass:.6f}, min W={grid.values.min():.3e}")

    def execute(
        self,
        cfg: ScenarioConfig,
        out_dir: Path,
        command: str = "run",
        outputs: Optional[Iterable[str]] = None,
    ) -> ScenarioOutcome:
        """요청된 출력을 모두 기록하고 manifest.json 을 마지막에 씁니다"""
        requested = list(outputs) if outputs is not None else list(cfg.outputs)
        writer = OutputWriter(out_dir, float_format=self.settings.csv_float_format).prepare()
        timings: Dict[str, float] = {}
        params = cfg.params
        j = cfg.target_j
        selectivity: Optional[SelectivityReport] = None
        metrics: Optional[MetricsReport] = None

        try:
            needs_root = (
                "selectivity" in requested
                or cfg.detuning_mode == "solve"
                or ("full_model_validation" in requested and cfg.validation.delta_a is None)
            )
            if needs_root:
                started = time.perf_counter()
                selectivity = self.solve_selectivity(cfg, params)
                timings["selectivity"] = time.perf_counter() - started
                if cfg.detuning_mode == "solve":
                    params = params.model_copy(update={"delta_a": selectivity.delta_a_root})
            root = selectivity.delta_a_root if selectivity is not None else None

            if "selectivity" in requested:
                writer.write_json("selectivity.json", selectivity)

            if "populations" in requested or "wigner" in requested:
                started = time.perf_counter()
                dist = self.populations(params, j, params.alpha_convention, cfg.n_c)
                if "populations" in requested:
                    self._write_populations(writer, dist)
                if "wigner" in requested:
                    self._write_wigner(writer, cfg, dist)
                timings["populations"] = time.perf_counter() - started

            if "metrics" in requested:
                started = time.perf_counter()
                metrics = self.metrics(cfg, params)
                writer.write_json("metrics.json", metrics)
                timings["metrics"] = time.perf_counter() - started

            if "full_model_validation" in requested:
                started = time.perf_counter()
                writer.write_json("validation.json", self.full_model_validation(cfg, params, root))
                timings["full_model_validation"] = time.perf_counter() - started

            manifest = self._manifest(cfg, params, command, writer, selectivity, metrics, timings)
            writer.write_json("manifest.json", manifest)
        except SimulatorError as e:
            e.details.setdefault("scenario", {"out_dir": str(out_dir), "target_j": j, "eta": params.eta})
            logger.error(f"시나리오 실행 실패 ({out_dir}): [{e.error_code}] {e.message}")
            writer.cleanup()
            raise
        except Exception as e:
            logger.error(f"시나리오 실행 중 예상치 못한 오류 ({out_dir}): {e}")
            writer.cleanup()
            raise

        logger.info(f"시나리오 완료: {out_dir} ({len(writer.files)}개 파일)")
        return ScenarioOutcome(manifest=manifest, metrics=metrics, selectivity=selectivity)

    def run_scenario(self, cfg: ScenarioConfig, out_dir: Path, command: str = "run", outputs: Optional[Iterable[str]] = None) -> RunManifest:
        return self.execute(cfg, out_dir, command, outputs).manifest

    def _manifest(
        self,
        cfg: ScenarioConfig,
        params: SystemParams,
        command: str,
        writer: OutputWriter,
        selectivity: Optional[SelectivityReport],
        metrics: Optional[MetricsReport],
        timings: Dict[str, float],
    ) -> RunManifest:
        audit = selectivity or audit_conditions(
            params, cfg.target_j, self.ctrl, self.settings.condition_ok_threshold, self.settings.condition_warn_threshold
        )
        alpha_values = {c: selective_rates(params, cfg.target_j, self.ctrl, c).alpha_j for c in CONVENTIONS}
        reference_summary: Dict[str, object] = {}
        if selectivity is not None and selectivity.reference_delta_a is not None:
            reference_summary["delta_a_reference"] = selectivity.reference_delta_a
            reference_summary["delta_a_deviation"] = selectivity.reference_deviation
        if metrics is not None and metrics.reference is not None:
            reference_summary["matching_conventions"] = metrics.reference.matching_conventions
            reference_summary["g2_deviation"] = metrics.reference.g2_deviation
            reference_summary["delta_deviation"] = metrics.reference.delta_deviation
        return RunManifest(
            tool=self.settings.app_name,
            version=__version__,
            command=command,
            params={**params.model_dump(mode="json"), "eta": params.eta, "kappa_a_effective": params.kappa_a_effective},
            alpha_values=alpha_values,
            files=list(writer.files),
            condition_summary={check.name: check.flag for check in audit.conditions},
            reference_summary=reference_summary,
            thresholds=self.thresholds,
            timings={k: round(v, 6) for k, v in timings.items()},
            created_at=datetime.now(timezone.utc).isoformat(),
        )
