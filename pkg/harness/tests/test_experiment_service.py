import numpy as np
import pytest
from frameshrink import signals
from frameshrink.errors import ConfigurationError, InputError
from payload_models.payloads import AggregateRow, ExperimentMode, Method, TrialRow

from services.experiment_service import ExperimentService
from services.method_service import MethodService
from services.report_service import ReportService
from services.verify_service import VerifyService


class FailingMethodService(MethodService):
    def run(self, method, config, frame, noisy, sigma, beta):
        if method is Method.REWEIGHTED_L1:
            raise InputError("observation rejected")
        return super().run(method, config, frame, noisy, sigma, beta)


def test_compare_rows_are_ordered_by_sigma_trial_method(experiment_service, small_config):
    config = small_config(sigmas=[1.0, 2.0])
    rows = experiment_service.run_compare(config)

    assert len(rows) == 2 * 2 * 4
    keys = [(row.sigma, row.trial, row.method) for row in rows]
    expected = [(s, t, m) for s in (1.0, 2.0) for t in range(2) for m in Method]
    assert keys == expected
    assert all(row.metric is not None and row.metric > 0 for row in rows)
    assert all(row.error == "" for row in rows)
    assert all(row.wall_time is None for row in rows)


def test_fixed_betas_are_reported(experiment_service, small_config):
    rows = experiment_service.run_compare(small_config(trials=1))
    assert {row.method: row.beta for row in rows} == {
        Method.L1_ADMM: 1.0,
        Method.NONCONVEX_ADMM: 1.5,
        Method.DIRECT_THRESHOLD: 2.0,
        Method.REWEIGHTED_L1: 1.0,
    }


def test_tuned_beta_comes_from_the_grid(experiment_service, small_config):
    config = small_config(beta_nonconvex=None, beta_grid=[0.5, 2.0, 3.0])
    work = experiment_service.prepare(config)
    beta = experiment_service.tune_beta(work, 0, 1.0, Method.NONCONVEX_ADMM)
    assert beta in config.beta_grid


def test_tuned_beta_minimises_trial_zero_error(experiment_service, small_config):
    config = small_config(beta_threshold=None, beta_grid=[0.5, 1.0, 2.0, 3.0])
    work = experiment_service.prepare(config)
    noisy = experiment_service.observe(work, 0, 1.0, 0)
    errors = {
        beta: signals.mse(
            work.clean,
            experiment_service.method_service.run(
                Method.DIRECT_THRESHOLD, config, work.frame, noisy, 1.0, beta
            ).x,
        )
        for beta in config.beta_grid
    }
    assert experiment_service.tune_beta(work, 0, 1.0, Method.DIRECT_THRESHOLD) == min(
        errors, key=errors.get
    )


def test_sweep_sigma_mean_equals_mean_of_trials(experiment_service, small_config):
    config = small_config(sigmas=[1.0, 2.0], trials=3)
    trial_rows = experiment_service.run_compare(config)
    aggregated = experiment_service.run_sweep_sigma(config)

    assert len(aggregated) == 2 * 4
    for row in aggregated:
        members = [r.metric for r in trial_rows if r.sigma == row.sigma and r.method is row.method]
        assert row.trials == 3
        assert row.failures == 0
        assert row.mean_metric == pytest.approx(np.mean(members), rel=1e-12)
        assert row.std_metric == pytest.approx(np.std(members), rel=1e-9, abs=1e-12)


def test_sweep_lambda_has_one_row_per_beta_and_setting(experiment_service, small_config):
    grid = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
    rows = experiment_service.run_sweep_lambda(
        small_config(ExperimentMode.SWEEP_LAMBDA, trials=1, beta_grid=grid)
    )
    assert len(rows) == 20
    assert all(isinstance(row, AggregateRow) for row in rows)
    assert [row.beta for row in rows[::2]] == grid
    assert [row.method for row in rows[:2]] == [Method.L1_ADMM, Method.NONCONVEX_ADMM]


def test_noiseless_trial_is_nearly_perfect(experiment_service, small_config):
    rows = experiment_service.run_compare(small_config(sigmas=[0.0], trials=1, tol=1e-10))
    assert len(rows) == 4
    for row in rows:
        assert row.error == ""
        assert row.metric < 1e-2


def test_method_failure_is_recorded_per_row(small_config):
    service = ExperimentService(FailingMethodService(), ReportService(), VerifyService())
    rows = service.run_compare(small_config(trials=2))

    failed = [row for row in rows if row.error]
    assert [row.method for row in failed] == [Method.REWEIGHTED_L1] * 2
    assert all(row.metric is None for row in failed)
    assert all("observation rejected" in row.error for row in failed)

    aggregated = service.aggregate(rows)
    reweighted = next(row for row in aggregated if row.method is Method.REWEIGHTED_L1)
    assert reweighted.failures == 2
    assert reweighted.mean_metric is None


def test_rows_echo_the_mu_the_solver_used(experiment_service, small_config):
    default_rows = experiment_service.run_compare(small_config(trials=1, mu=None))
    assert {row.mu for row in default_rows} == {2.0}
    explicit_rows = experiment_service.run_compare(small_config(trials=1, mu=3.5))
    assert {row.mu for row in explicit_rows} == {3.5}


def test_mu_at_or_below_one_over_r_aborts_up_front(experiment_service, small_config):
    with pytest.raises(ConfigurationError):
        experiment_service.run_compare(small_config(mu=1.0))


def test_trial_seeds_are_stable_and_distinct(experiment_service, small_config):
    config = small_config()
    seeds = {
        experiment_service.trial_seed(config, s, t) for s in range(3) for t in range(5)
    }
    assert len(seeds) == 15
    assert experiment_service.trial_seed(config, 1, 2) == experiment_service.trial_seed(
        config, 1, 2
    )
    other = small_config(seed=1)
    assert experiment_service.trial_seed(other, 0, 0) != experiment_service.trial_seed(
        config, 0, 0
    )


def test_reports_are_byte_identical_without_timestamp(experiment_service, small_config, tmp_path):
    first = experiment_service.run(small_config(output=tmp_path / "a.csv"))
    second = experiment_service.run(small_config(output=tmp_path / "b.csv", workers=3))
    assert first.path.read_bytes() == second.path.read_bytes()
    assert first.path.read_text().splitlines()[0] == ",".join(TrialRow.columns())


def test_timestamp_line_and_wall_time(experiment_service, small_config):
    report = experiment_service.run(small_config(trials=1, timestamp=True))
    lines = report.path.read_text().splitlines()
    assert lines[0].startswith("# generated ")
    assert all(row.wall_time is not None and row.wall_time >= 0 for row in report.rows)
    body = experiment_service.report_service.read_body(report.path)
    assert body[0] == TrialRow.columns()
    assert len(body) == 1 + 4


def test_denoise1d_writes_per_sample_table(experiment_service, small_config):
    report = experiment_service.run(small_config(ExperimentMode.DENOISE1D))
    body = experiment_service.report_service.read_body(report.path)

    assert body[0] == ["index", "clean", "noisy", *(m.value for m in Method)]
    assert len(body) == 1 + 64
    assert len(report.rows) == 4
    clean = signals.rescale_to_std(signals.generate(signals.SignalKind.BLOCKS, 64), 7.0)
    np.testing.assert_allclose([float(line[1]) for line in body[1:]], clean, rtol=1e-9, atol=1e-9)


def test_denoise2d_writes_images(experiment_service, small_config, tmp_path):
    image_dir = tmp_path / "images"
    report = experiment_service.run(
        small_config(
            ExperimentMode.DENOISE2D,
            dimension=2,
            height=16,
            width=16,
            sigmas=[20.0],
            image_dir=image_dir,
        )
    )

    assert [row.metric_name for row in report.rows] == ["psnr"] * 4
    names = sorted(p.name for p in image_dir.iterdir())
    assert names == sorted(["clean.pgm", "noisy.pgm", *(f"{m.value}.pgm" for m in Method)])
    assert signals.read_pgm(image_dir / "clean.pgm").shape == (16, 16)


def test_denoise2d_reads_a_pgm_source(experiment_service, small_config, tmp_path):
    source = signals.write_pgm(tmp_path / "source.pgm", signals.piecewise_smooth_image(32, 16))
    report = experiment_service.run(
        small_config(
            ExperimentMode.DENOISE2D,
            dimension=2,
            image=source,
            sigmas=[20.0],
            methods=[Method.DIRECT_THRESHOLD],
        )
    )
    (row,) = report.rows
    assert row.source == "source.pgm"
    assert row.size == "32x16"
