"""
스윕 서비스
(η, j) 격자나 명시적 지점 목록을 작업자 풀에서 실행하고 집계 표를 격자 순서대로 작성합니다.
"""

import copy
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from app import __version__
from app.config.settings import Settings, get_settings
from app.core.exceptions import SimulatorError, SweepPartialFailure
from app.models.reference import reference_cell
from app.schemas.reports import RunManifest, SweepPointStatus
from app.schemas.scenario import ScenarioConfig, build_config
from app.services.output_writer import OutputWriter
from app.services.scenario_service import CONVENTIONS, ScenarioService

logger = logging.getLogger(__name__)

AGGREGATE_FILE = "sweep_metrics.csv"
METRIC_COLUMNS = ("omega_j", "nbar", "g2", "delta_fock")
UNEXPECTED_ERROR_CODE = "UNEXPECTED_ERROR"


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def expand_points(cfg: ScenarioConfig) -> List[Dict[str, Any]]:
    """격자를 지점 목록으로 펼칩니다: [{"label", "eta", "j", "config"}] (η 바깥, j 안쪽 순서)"""
    base = cfg.model_dump(mode="json", exclude={"sweep", "output_dir"})
    grid = cfg.sweep
    points: List[Dict[str, Any]] = []
    if grid is not None and (grid.eta or grid.j):
        etas = grid.eta or [cfg.params.eta]
        levels = grid.j or [cfg.target_j]
        for eta in etas:
            for j in levels:
                params: Dict[str, Any] = {"omega_m": 1.0 / eta if eta > 0 else -1.0}
                cell = reference_cell(eta, j) if grid.use_reference_detuning else None
                if cell is not None:
                    params["delta_a"] = cell.delta_a
                points.append(
                    {
                        "label": f"eta_{eta:g}_j_{j}",
                        "eta": eta,
                        "j": j,
                        "config": _merge(base, {"params": params, "target_j": j}),
                    }
                )
    if grid is not None:
        for index, overrides in enumerate(grid.points, start=len(points)):
            config = _merge(base, overrides)
            omega_m = config.get("params", {}).get("omega_m")
            points.append(
                {
                    "label": f"point_{index:03d}",
                    "eta": 1.0 / omega_m if isinstance(omega_m, (int, float)) and omega_m > 0 else math.nan,
                    "j": config.get("target_j"),
                    "config": config,
                }
            )
    if not points:
        points.append({"label": "point_000", "eta": cfg.params.eta, "j": cfg.target_j, "config": base})
    return points


def run_point(payload: Dict[str, Any]) -> Dict[str, Any]:
    """작업자 프로세스에서 지점 하나를 실행하고 집계 행을 반환 (실패는 오류 행으로)"""
    label = payload["label"]
    row: Dict[str, Any] = {"label": label, "eta": payload["eta"], "j": payload["j"], "delta_a": math.nan}
    try:
        cfg = build_config(payload["config"])
        outputs = list(dict.fromkeys(list(cfg.outputs) + ["metrics"]))
        outcome = ScenarioService().execute(cfg, Path(payload["out_dir"]), command="sweep", outputs=outputs)
        metrics = outcome.metrics
        row["eta"] = metrics.eta
        row["j"] = metrics.j
        row["delta_a"] = metrics.delta_a
        for convention in CONVENTIONS:
            values = metrics.conventions[convention]
            for column in METRIC_COLUMNS:
                value = getattr(values, column)
                row[f"{column}_{convention}"] = math.nan if value is None else value
        row.update(status="ok", error_code="", message="")
    except SimulatorError as e:
        logger.warning(f"스윕 지점 '{label}' 실패: [{e.error_code}] {e.message}")
        row.update(status="error", error_code=e.error_code, message=e.message)
    except Exception as e:
        logger.exception(f"스윕 지점 '{label}' 에서 예상치 못한 오류")
        row.update(status="error", error_code=UNEXPECTED_ERROR_CODE, message=f"{type(e).__name__}: {e}")
    return row


class SweepService:
    """스윕 서비스 클래스"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()

    def sweep(self, cfg: ScenarioConfig, out_dir: Path, parallel: Optional[int] = None) -> RunManifest:
        """지점마다 하위 디렉터리를 만들고, 모두 끝난 뒤 집계 CSV 와 manifest.json 을 씁니다"""
        out_dir = Path(out_dir)
        points = expand_points(cfg)
        workers = max(1, min(parallel or self.settings.parallelism, len(points)))
        payloads = [{**point, "out_dir": str(out_dir / point["label"])} for point in points]
        writer = OutputWriter(out_dir, float_format=self.settings.csv_float_format).prepare()
        logger.info(f"스윕 시작: {len(points)}개 지점, 작업자 {workers}개")

        if workers == 1:
            rows = [run_point(payload) for payload in payloads]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                rows = list(pool.map(run_point, payloads))

        columns = ["label", "eta", "j", "delta_a"]
        columns += [f"{column}_{c}" for c in CONVENTIONS for column in METRIC_COLUMNS]
        columns += ["status", "error_code", "message"]
        frame = pd.DataFrame(rows).reindex(columns=columns)
        writer.write_csv(AGGREGATE_FILE, frame)

        statuses = [
            SweepPointStatus(
                label=row["label"],
                success=row["status"] == "ok",
                error_code=row["error_code"] or None,
                message=row["message"] or None,
            )
            for row in rows
        ]
        manifest = RunManifest(
            tool=self.settings.app_name,
            version=__version__,
            command="sweep",
            files=list(writer.files),
            reference_summary=trend_summary(frame),
            points=statuses,
            created_at=datetime.now(timezone.utc).isoformat(),
        )
        writer.write_json("manifest.json", manifest)

        failed = [status.label for status in statuses if not status.success]
        if failed:
            raise SweepPartialFailure(
                f"{len(points)}개 중 {len(failed)}개 지점이 실패했습니다: {', '.join(failed)}",
                details={"failed": failed},
            )
        logger.info(f"스윕 완료: {out_dir}")
        return manifest


def trend_summary(frame: pd.DataFrame) -> Dict[str, object]:
    """규약별 경향 점검: 모든 칸에서 g² < 1, δ 가 η 와 j 에 대해 증가"""
    ok = frame[frame["status"] == "ok"]
    summary: Dict[str, object] = {}
    for convention in CONVENTIONS:
        g2 = ok[f"g2_{convention}"]
        delta = ok[f"delta_fock_{convention}"]
        table = ok.assign(delta=delta).pivot_table(index="eta", columns="j", values="delta")
        summary[convention] = {
            "g2_below_one": bool((g2 < 1.0).all()) if len(g2) else None,
            "delta_increases_with_eta": bool((table.diff(axis=0).iloc[1:] > 0).all().all()) if len(table) > 1 else None,
            "delta_increases_with_j": bool((table.diff(axis=1).iloc[:, 1:] > 0).all().all()) if table.shape[1] > 1 else None,
        }
    return summary
