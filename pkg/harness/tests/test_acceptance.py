import math

import pytest
from payload_models.payloads import ExperimentConfig, ExperimentMode, Method

pytestmark = pytest.mark.slow

COMPETITORS = [Method.L1_ADMM, Method.DIRECT_THRESHOLD, Method.REWEIGHTED_L1]


def _by_sigma(rows):
    table = {}
    for row in rows:
        table.setdefault(row.sigma, {})[row.method] = row.mean_metric
    return table


def test_nonconvex_has_lowest_mean_rmse_on_blocks(experiment_service):
    config = ExperimentConfig(
        mode=ExperimentMode.SWEEP_SIGMA,
        n=1024,
        scales=4,
        sigmas=[1.0, 2.0, 3.0, 4.0],
        trials=15,
        workers=4,
    )
    table = _by_sigma(experiment_service.run_sweep_sigma(config))

    assert sorted(table) == [1.0, 2.0, 3.0, 4.0]
    for sigma, means in table.items():
        for method in COMPETITORS:
            assert means[Method.NONCONVEX_ADMM] <= means[method], (sigma, method, means)


def test_nonconvex_psnr_beats_l1_on_synthetic_image(experiment_service):
    sigma = 255.0 / 10 ** (14.6 / 20)
    # input PSNR of 14.6 dB at peak 255
    assert sigma == pytest.approx(47.48, abs=0.01)
    config = ExperimentConfig(
        mode=ExperimentMode.COMPARE,
        dimension=2,
        height=64,
        width=64,
        scales=3,
        sigmas=[sigma],
        trials=1,
        methods=[Method.L1_ADMM, Method.NONCONVEX_ADMM],
    )
    rows = {row.method: row.metric for row in experiment_service.run_compare(config)}
    assert math.isfinite(rows[Method.NONCONVEX_ADMM])
    assert rows[Method.NONCONVEX_ADMM] >= rows[Method.L1_ADMM]
