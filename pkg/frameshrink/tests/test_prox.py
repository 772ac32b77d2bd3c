import numpy as np
import pytest
from numpy.testing import assert_allclose

from frameshrink import penalty, prox
from frameshrink.errors import ConvexityViolationError, ParameterDomainError
from frameshrink.penalty import PenaltyKind
from frameshrink.prox import ProxQuery

CURVED = [PenaltyKind.RATIONAL, PenaltyKind.LOG, PenaltyKind.ATAN]
ORACLE_STEP = 1e-5


def test_soft_threshold_values():
    assert prox.prox_abs(3.0, 1.0) == 2.0
    assert prox.prox_abs(-0.5, 1.0) == 0.0
    assert_allclose(prox.prox_abs(np.array([-2.5, 0.2, 1.5]), 1.0), [-1.5, 0.0, 0.5])


def test_soft_threshold_rejects_non_positive_weight():
    with pytest.raises(ParameterDomainError):
        prox.prox_abs(1.0, 0.0)


def test_query_accepts_lambda_alias():
    q = ProxQuery(y=2.0, **{"lambda": 0.5}, a=1.0)
    assert q.lam == 0.5
    assert ProxQuery(y=2.0, lam=0.5).a == 0.0


def test_query_rejects_bad_values():
    with pytest.raises(ValueError):
        ProxQuery(y=1.0, lam=0.0)
    with pytest.raises(ValueError):
        ProxQuery(y=1.0, lam=1.0, a=-1.0)


@pytest.mark.parametrize("kind", CURVED)
def test_zero_parameter_equals_soft_threshold(kind):
    y = np.linspace(-4, 4, 41)
    assert_allclose(prox.threshold(kind, y, 1.0, 0.0), prox.prox_abs(y, 1.0))


@pytest.mark.parametrize("kind", CURVED)
def test_fixed_point_condition(kind):
    y = np.array([1.5, 3.0, 7.0, -2.0])
    lam, a = 1.0, 0.8
    x = prox.threshold(kind, y, lam, a)
    residual = x + lam * penalty.deriv(kind, x, a) - y
    assert_allclose(residual, 0.0, atol=1e-10)


@pytest.mark.parametrize("kind", CURVED)
def test_prox_is_odd_and_monotone(kind):
    y = np.linspace(0.0, 10.0, 201)
    out = prox.threshold(kind, y, 1.2, 0.8)
    assert_allclose(prox.threshold(kind, -y, 1.2, 0.8), -out)
    assert np.all(np.diff(out) >= 0)


@pytest.mark.parametrize("kind", CURVED)
@pytest.mark.parametrize("y", [100.0, -100.0])
def test_large_inputs_are_nearly_unbiased(kind, y):
    lam, a = 1.0, 0.5
    x = prox.threshold(kind, y, lam, a)
    assert abs(y - x) < lam / 2


@pytest.mark.parametrize(
    "kind, a", [(PenaltyKind.ABS, 0.0)] + [(kind, a) for kind in CURVED for a in (0.3, 0.6)]
)
def test_shrinkage_between_soft_threshold_and_identity(kind, a):
    lam = 1.5
    y = np.concatenate([np.linspace(1.51, 20.0, 200), -np.linspace(1.51, 20.0, 200)])
    x = np.abs(prox.threshold(kind, y, lam, a))
    assert np.all(x >= np.abs(y) - lam - 1e-12)
    assert np.all(x <= np.abs(y) + 1e-12)


def test_non_convex_prox_rejected():
    with pytest.raises(ConvexityViolationError):
        prox.prox_penalty(ProxQuery(y=3.0, lam=1.0, a=1.5), PenaltyKind.LOG)
    with pytest.raises(ConvexityViolationError):
        prox.threshold(PenaltyKind.ATAN, [1.0, 2.0], [1.0, 2.0], 0.6)


def test_boundary_prox_is_continuous(caplog):
    q = ProxQuery(y=1.0 + 1e-7, lam=1.0, a=1.0)
    assert q.is_boundary
    with caplog.at_level("WARNING"):
        value = prox.prox_penalty(q, PenaltyKind.RATIONAL)
    assert 0.0 <= value < 1e-2
    assert "convexity boundary" in caplog.text


def test_zero_weight_passes_through():
    y = np.array([-0.3, 0.2, 5.0])
    out = prox.threshold(PenaltyKind.ATAN, y, np.array([0.0, 1.0, 0.0]), 0.5)
    assert_allclose(out, [-0.3, 0.0, 5.0])


def test_threshold_keeps_input_shape():
    y = np.arange(12.0).reshape(3, 4) - 6
    assert prox.threshold(PenaltyKind.LOG, y, 1.0, 0.5).shape == (3, 4)


@pytest.mark.parametrize("kind", [PenaltyKind.ABS, *CURVED])
def test_prox_matches_grid_oracle(kind):
    rng = np.random.default_rng(7)
    for _ in range(200):
        y = rng.uniform(-10.0, 10.0)
        lam = rng.uniform(1e-3, 2.0)
        a = 0.0 if kind is PenaltyKind.ABS else rng.uniform(0.0, 0.99 / lam)
        q = ProxQuery(y=y, lam=lam, a=a)
        value = prox.prox_penalty(q, kind)
        oracle = prox.oracle_prox(q, kind, x_range=(min(0.0, y), max(0.0, y)), step=ORACLE_STEP)
        assert abs(value - oracle) <= ORACLE_STEP + 1e-12, (y, lam, a)
        assert (value == 0.0) == (abs(y) <= lam)


def test_oracle_preconditions():
    q = ProxQuery(y=2.0, lam=1.0)
    with pytest.raises(ParameterDomainError):
        prox.oracle_prox(q, PenaltyKind.ABS, step=0.0)
    with pytest.raises(ParameterDomainError):
        prox.oracle_prox(q, PenaltyKind.ABS, x_range=(1.0, 0.0))
    with pytest.raises(ParameterDomainError):
        prox.oracle_prox(q, PenaltyKind.ABS, x_range=(0.5, 3.0))


def test_threshold_function_table():
    table = prox.threshold_function_table(PenaltyKind.RATIONAL, 1.0, 1.0, np.linspace(-3, 3, 7))
    assert table.shape == (7, 2)
    assert_allclose(table[:, 1][2:5], 0.0)
    assert table[-1, 1] > 3.0 - 1.0
