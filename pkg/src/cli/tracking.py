"""
Optional MLflow Tracking

mlflow가 설치되어 있으면 cell별 파라미터/메트릭 기록, 없으면 비활성화
(tracking URI는 MLFLOW_TRACKING_URI 환경 변수를 mlflow가 직접 읽음)
"""

import logging
from typing import Optional

from src.active.pipeline import RunReport

logger = logging.getLogger(__name__)

try:
    import mlflow
    MLFLOW_AVAILABLE = True
except ImportError:
    mlflow = None
    MLFLOW_AVAILABLE = False


class ExperimentTracker:
    """실험 cell 결과를 MLflow run으로 기록"""

    def __init__(self, enabled: bool = False, experiment_name: str = "usim-dal"):
        self.enabled = enabled and MLFLOW_AVAILABLE
        if enabled and not MLFLOW_AVAILABLE:
            logger.warning("mlflow not installed. Tracking disabled.")
        if self.enabled:
            mlflow.set_experiment(experiment_name)

    def log_cell(self, report: RunReport, artifact_dir: Optional[str] = None) -> None:
        if not self.enabled:
            return
        run_name = f"{report.arm.value}_k{report.budget}_s{report.seed}"
        try:
            with mlflow.start_run(run_name=run_name):
                mlflow.log_params({
                    "dataset": report.dataset,
                    "arm": report.arm.value,
                    "budget": report.budget,
                    "seed": report.seed,
                    "rounds": report.rounds,
                })
                mlflow.log_metrics(report.metrics.as_row())
                if artifact_dir:
                    mlflow.log_artifacts(artifact_dir)
        except Exception as e:
            logger.warning(f"MLflow logging failed for {run_name}: {e}")
