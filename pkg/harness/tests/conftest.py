import pytest
from payload_models.payloads import ExperimentConfig, ExperimentMode

from services.experiment_service import ExperimentService
from services.method_service import MethodService
from services.report_service import ReportService
from services.verify_service import VerifyService

SMALL = {
    "n": 64,
    "scales": 2,
    "sigmas": [1.0],
    "trials": 2,
    "max_iter": 200,
    "beta_l1": 1.0,
    "beta_nonconvex": 1.5,
    "beta_threshold": 2.0,
    "beta_reweighted": 1.0,
    "timestamp": False,
}


@pytest.fixture
def experiment_service() -> ExperimentService:
    return ExperimentService(MethodService(), ReportService(), VerifyService())


@pytest.fixture
def small_config(tmp_path):
    def build(mode: ExperimentMode = ExperimentMode.COMPARE, **kwargs) -> ExperimentConfig:
        values = {**SMALL, "mode": mode, "output": tmp_path / f"{mode.value}.csv", **kwargs}
        return ExperimentConfig(**values)

    return build
