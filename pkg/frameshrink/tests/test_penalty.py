import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from frameshrink import penalty
from frameshrink.errors import ParameterDomainError
from frameshrink.penalty import AssumptionGrid, PenaltyKind

CURVED = [PenaltyKind.RATIONAL, PenaltyKind.LOG, PenaltyKind.ATAN]


def test_abs_is_plain_magnitude():
    x = np.array([-3.0, -0.5, 0.0, 2.0])
    assert_allclose(penalty.eval(PenaltyKind.ABS, x, 0.0), np.abs(x))


@pytest.mark.parametrize("kind", CURVED)
def test_zero_parameter_recovers_l1(kind):
    x = np.linspace(-5, 5, 11)
    assert np.array_equal(penalty.eval(kind, x, 0.0), np.abs(x))


def test_closed_forms_at_one():
    assert penalty.eval(PenaltyKind.RATIONAL, 1.0, 1.0) == pytest.approx(2.0 / 3.0)
    assert penalty.eval(PenaltyKind.LOG, 1.0, 1.0) == pytest.approx(math.log(2.0))
    expected_atan = 2.0 / math.sqrt(3.0) * (math.atan(3.0 / math.sqrt(3.0)) - math.pi / 6.0)
    assert penalty.eval(PenaltyKind.ATAN, 1.0, 1.0) == pytest.approx(expected_atan)


@pytest.mark.parametrize("kind", CURVED)
def test_penalty_is_even_and_vanishes_at_zero(kind):
    x = np.linspace(0.1, 8.0, 20)
    assert_allclose(penalty.eval(kind, -x, 0.7), penalty.eval(kind, x, 0.7))
    assert penalty.eval(kind, 0.0, 0.7) == 0.0


@pytest.mark.parametrize("kind", CURVED)
def test_derivatives_match_closed_forms(kind):
    x = np.array([0.3, 1.0, 4.0])
    a = 0.5
    h = 1e-6
    fd = (penalty.eval(kind, x + h, a) - penalty.eval(kind, x - h, a)) / (2 * h)
    assert_allclose(penalty.deriv(kind, x, a), fd, rtol=1e-6)
    assert_allclose(penalty.deriv(kind, -x, a), -fd, rtol=1e-6)
    fd2 = (penalty.deriv(kind, x + h, a) - penalty.deriv(kind, x - h, a)) / (2 * h)
    assert_allclose(penalty.second_deriv(kind, x, a), fd2, rtol=1e-5)


@pytest.mark.parametrize("kind", CURVED)
def test_curvature_limit_at_zero(kind):
    for a in (0.1, 1.0, 5.0):
        assert penalty.second_deriv(kind, 1e-9, a) == pytest.approx(-a, rel=1e-6)


def test_derivative_undefined_at_zero():
    with pytest.raises(ParameterDomainError):
        penalty.deriv(PenaltyKind.LOG, 0.0, 1.0)
    with pytest.raises(ParameterDomainError):
        penalty.second_deriv(PenaltyKind.LOG, np.array([1.0, 0.0]), 1.0)


def test_negative_parameter_rejected():
    with pytest.raises(ParameterDomainError):
        penalty.eval(PenaltyKind.ATAN, 1.0, -0.1)
    with pytest.raises(ParameterDomainError):
        penalty.check_param(np.array([0.1, np.nan]))


def test_scalar_input_returns_float():
    assert isinstance(penalty.eval(PenaltyKind.LOG, 2.0, 1.0), float)
    assert isinstance(penalty.s_eval(PenaltyKind.LOG, 2.0, 1.0), float)


@pytest.mark.parametrize("kind", CURVED)
@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 5.0])
def test_regularity_checks_pass(kind, a):
    report = penalty.check_assumption1(kind, a)
    assert report.passed, [(c.name, c.worst) for c in report.failures]
    assert {c.name for c in report.checks} >= {"s_bound", "s_c2", "item5_curvature_infimum"}


def test_regularity_checks_pass_for_abs():
    assert penalty.check_assumption1(PenaltyKind.ABS, 0.0).passed


@pytest.mark.parametrize("kind", CURVED)
@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 5.0])
def test_residual_curvature_bounds(kind, a):
    x = AssumptionGrid().points()
    s2 = penalty.second_deriv(kind, x, a)
    assert np.all(s2 >= -a - 1e-5)
    assert np.all(s2 <= 1e-5)


def test_report_lookup_by_name():
    report = penalty.check_assumption1(PenaltyKind.LOG, 1.0)
    assert report.get("item2_increasing").passed
    with pytest.raises(KeyError):
        report.get("missing")


def test_assumption_grid_validation():
    with pytest.raises(ValueError):
        AssumptionGrid(x_min=2.0, x_max=1.0)
    with pytest.raises(ValueError):
        AssumptionGrid(tol=0.0)
