import pytest
from payload_models.payloads import ExperimentConfig, ExperimentMode

from services.verify_service import VerifyService


@pytest.fixture(scope="module")
def default_rows():
    return VerifyService().run(ExperimentConfig(mode=ExperimentMode.VERIFY))


def test_default_run_passes(default_rows):
    failed = [(row.suite, row.subject, row.check, row.detail) for row in default_rows if not row.passed]
    assert failed == []


def test_every_suite_is_covered(default_rows):
    assert {row.suite for row in default_rows} == {
        "parseval",
        "penalty",
        "convexity",
        "mu_guard",
        "oracle",
    }


def test_parseval_rows_cover_builtin_frames(default_rows):
    parseval = [row for row in default_rows if row.suite == "parseval"]
    assert len(parseval) == 4 * 4
    assert max(row.worst for row in parseval) <= 1e-10


def test_penalty_rows_cover_curved_kinds_and_abs(default_rows):
    subjects = {row.subject for row in default_rows if row.suite == "penalty"}
    assert len(subjects) == 3 * 4 + 1
    assert "abs(a=0)" in subjects
    assert "rational(a=0.5)" in subjects


def test_oracle_gap_is_small(default_rows):
    oracle = [row for row in default_rows if row.suite == "oracle"]
    assert len(oracle) == 3
    assert all(row.worst <= 1e-6 for row in oracle)


def test_mu_at_one_over_r_fails_guard():
    rows = VerifyService().check_mu_guard(ExperimentConfig(mode=ExperimentMode.VERIFY, mu=1.0))
    configured = {row.subject: row.passed for row in rows if row.check == "accepts_configured_mu"}
    assert configured["MatrixFrame"] is True
    assert not all(configured.values())
    assert all(row.passed for row in rows if row.check == "rejects_mu_at_1_over_r")


def test_nonconvex_toy_parameter_is_reported():
    rows = VerifyService().check_convexity(ExperimentConfig(mode=ExperimentMode.VERIFY, toy_a=0.3))
    configured = next(row for row in rows if row.check == "configured_a")
    assert not configured.passed
    assert configured.detail == "NonConvex"
    assert all(row.passed for row in rows if row.check != "configured_a")
