"""Scalar sparsity penalties phi(x; a) and their smooth residual s = phi - |x|.

Every function is vectorised: ``x`` and ``a`` may be scalars or arrays that
broadcast together. ``a = 0`` always takes an exact ``|x|`` branch.

Closed forms, with t = |x|:

    rational  phi = t / (1 + a t / 2)
    log       phi = log(1 + a t) / a
    atan      phi = 2 / (a sqrt(3)) * (atan((1 + 2 a t) / sqrt(3)) - pi / 6)
"""

import enum
import logging
import math
from typing import Annotated

import numpy as np
import pydantic

from frameshrink.errors import ParameterDomainError
from frameshrink.schemas import PropertyCheck, PropertyReport

logger = logging.getLogger(__name__)

_SQRT3 = math.sqrt(3.0)

PenaltyParam = Annotated[float, pydantic.Field(ge=0.0)]


class PenaltyKind(enum.Enum):
    ABS = "abs"
    RATIONAL = "rational"
    LOG = "log"
    ATAN = "atan"


class AssumptionGrid(pydantic.BaseModel):
    x_min: float = 1e-3
    x_max: float = 20.0
    num: int = 401
    tol: float = 1e-6
    fd_step: float = 1e-5

    @pydantic.field_validator("x_min", "x_max", "tol", "fd_step")
    def validate_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError(f"{v} should be positive.")
        return v

    @pydantic.model_validator(mode="after")
    def validate_range(self):
        if self.x_max <= self.x_min or self.num < 2:
            raise ValueError("grid needs x_max > x_min and at least two points.")
        return self

    def points(self) -> np.ndarray:
        return np.geomspace(self.x_min, self.x_max, self.num)


def check_param(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(~np.isfinite(a)) or np.any(a < 0):
        raise ParameterDomainError(f"non-convexity parameter must be finite and >= 0, got {a}")
    return a


def _split(a: np.ndarray):
    # Safe divisor for the a > 0 branch; entries with a == 0 are masked out afterwards.
    zero = a == 0
    return zero, np.where(zero, 1.0, a)


def phi_abs(kind: PenaltyKind, t, a) -> np.ndarray:
    """phi evaluated at t = |x| >= 0."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if kind is PenaltyKind.ABS:
        return np.broadcast_to(t, np.broadcast_shapes(t.shape, a.shape)).copy()
    zero, a_s = _split(a)
    if kind is PenaltyKind.RATIONAL:
        value = t / (1.0 + a_s * t / 2.0)
    elif kind is PenaltyKind.LOG:
        value = np.log1p(a_s * t) / a_s
    else:
        # atan(p) - atan(q) folded into one atan, exact at t = 0
        at = a_s * t
        value = 2.0 / (a_s * _SQRT3) * np.arctan(_SQRT3 * at / (2.0 + at))
    return np.where(zero, t, value)


def dphi_abs(kind: PenaltyKind, t, a) -> np.ndarray:
    """phi'(t) for t >= 0, with the right limit phi'(0+) = 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if kind is PenaltyKind.ABS:
        return np.ones(np.broadcast_shapes(t.shape, a.shape))
    if kind is PenaltyKind.RATIONAL:
        return 1.0 / (1.0 + a * t / 2.0) ** 2
    if kind is PenaltyKind.LOG:
        return 1.0 / (1.0 + a * t)
    at = a * t
    return 1.0 / (1.0 + at + at * at)


def d2phi_abs(kind: PenaltyKind, t, a) -> np.ndarray:
    """phi''(t) for t >= 0, with phi''(0+) = -a at t = 0."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(a, dtype=float)
    if kind is PenaltyKind.ABS:
        return np.zeros(np.broadcast_shapes(t.shape, a.shape))
    if kind is PenaltyKind.RATIONAL:
        return -a / (1.0 + a * t / 2.0) ** 3
    if kind is PenaltyKind.LOG:
        return -a / (1.0 + a * t) ** 2
    at = a * t
    return -(a + 2.0 * a * at) / (1.0 + at + at * at) ** 2


def _scalar(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def eval(kind: PenaltyKind, x, a):
    a = check_param(a)
    return _scalar(phi_abs(kind, np.abs(np.asarray(x, dtype=float)), a))


def deriv(kind: PenaltyKind, x, a):
    a = check_param(a)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ParameterDomainError("phi is not differentiable at x = 0; handle the kink explicitly")
    return _scalar(np.sign(x) * dphi_abs(kind, np.abs(x), a))


def second_deriv(kind: PenaltyKind, x, a):
    a = check_param(a)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise ParameterDomainError("phi'' is only defined away from x = 0")
    return _scalar(d2phi_abs(kind, np.abs(x), a))


def s_eval(kind: PenaltyKind, x, a):
    a = check_param(a)
    t = np.abs(np.asarray(x, dtype=float))
    return _scalar(phi_abs(kind, t, a) - t)


def _close(estimate, exact, tol: float) -> tuple[bool, float]:
    gap = np.abs(np.asarray(estimate) - np.asarray(exact)) / np.maximum(1.0, np.abs(exact))
    return bool(np.all(gap <= tol)), float(np.max(gap))


def check_assumption1(
    kind: PenaltyKind, a: float, grid: AssumptionGrid | None = None
) -> PropertyReport:
    """Sample the penalty and report which regularity properties hold.

    Items 1-6 are the smoothness/shape requirements a penalty must meet for
    the convexity guarantee to apply; "s_bound" and "s_c2" check that the
    residual s = phi - |x| is C2 with -a <= s'' <= 0.
    """
    grid = grid or AssumptionGrid()
    a = float(check_param(a))
    tol = grid.tol
    x = grid.points()
    h = grid.fd_step * np.maximum(1.0, x)
    checks = []

    phi_pos = phi_abs(kind, x, a)
    sym_gap = np.abs(eval(kind, -x, a) - eval(kind, x, a))
    h0 = 1e-9
    continuous = abs(eval(kind, h0, a)) <= h0 and eval(kind, 0.0, a) == 0.0
    fd1 = (phi_abs(kind, x + h, a) - phi_abs(kind, x - h, a)) / (2 * h)
    d1 = dphi_abs(kind, x, a)
    d1_ok, d1_gap = _close(fd1, d1, tol)
    checks.append(
        PropertyCheck(
            name="item1_continuous_symmetric",
            passed=bool(np.all(sym_gap == 0) and continuous and np.all(np.isfinite(phi_pos)))
            and d1_ok,
            worst=max(float(sym_gap.max()), d1_gap),
            detail="phi(-x) == phi(x), phi(0+) -> 0, central differences match phi'",
        )
    )

    checks.append(
        PropertyCheck(
            name="item2_increasing",
            passed=bool(np.all(d1 > 0)) and d1_ok,
            worst=d1_gap,
            detail=f"min phi' on grid = {float(d1.min()):.3e}",
        )
    )

    d2 = d2phi_abs(kind, x, a)
    fd2 = (dphi_abs(kind, x + h, a) - dphi_abs(kind, x - h, a)) / (2 * h)
    d2_ok, d2_gap = _close(fd2, d2, tol)
    checks.append(
        PropertyCheck(
            name="item3_concave_on_positive_axis",
            passed=bool(np.all(d2 <= tol)) and d2_ok,
            worst=max(float(d2.max()), d2_gap),
            detail="phi'' <= 0 for x > 0",
        )
    )

    h_small = 1e-6
    slope_gap = abs(eval(kind, h_small, a) / h_small - 1.0)
    checks.append(
        PropertyCheck(
            name="item4_unit_slope_at_zero",
            passed=bool(dphi_abs(kind, 0.0, a) == 1.0) and slope_gap <= a * h_small + tol,
            worst=slope_gap,
            detail="phi(h)/h -> 1 as h -> 0+",
        )
    )

    near_zero_gap = abs(float(d2phi_abs(kind, h_small, a)) + a)
    checks.append(
        PropertyCheck(
            name="item5_curvature_infimum",
            passed=bool(np.all(d2 >= -a - tol)) and near_zero_gap <= 3 * a * a * h_small + tol,
            worst=max(float(np.max(-a - d2)), near_zero_gap),
            detail=f"inf phi'' = phi''(0+) = -{a}",
        )
    )

    l1_gap = np.abs(eval(kind, x, 0.0) - x)
    checks.append(
        PropertyCheck(
            name="item6_l1_at_zero_parameter",
            passed=bool(np.all(l1_gap == 0)),
            worst=l1_gap,
            detail="phi(x; 0) == |x|",
        )
    )

    s2 = d2  # s'' = phi'' away from 0
    checks.append(
        PropertyCheck(
            name="s_bound",
            passed=bool(np.all(s2 >= -a - tol) and np.all(s2 <= tol)),
            worst=max(float(np.max(-a - s2)), float(np.max(s2))),
            detail="-a <= s'' <= 0 on the grid",
        )
    )

    c2_ok = True
    c2_worst = 0.0
    for step in (1e-3, 1e-4):
        s_pos = s_eval(kind, step, a)
        s_neg = s_eval(kind, -step, a)
        ds = float(dphi_abs(kind, step, a)) - 1.0
        curvature = 2.0 * s_pos / step**2
        curvature_gap = abs(curvature + a)
        c2_ok &= s_pos == s_neg and abs(ds) <= a * step + 1e-12
        c2_ok &= curvature_gap <= a * a * step + 1e-8
        c2_worst = max(c2_worst, curvature_gap)
    checks.append(
        PropertyCheck(
            name="s_c2",
            passed=bool(c2_ok),
            worst=c2_worst,
            detail="s'(0+/-) -> 0 and second differences of s at 0 -> -a",
        )
    )

    report = PropertyReport(subject=f"{kind.value}(a={a})", checks=checks)
    if not report.passed:
        logger.warning(
            "Penalty %s fails %s", report.subject, [c.name for c in report.failures]
        )
    return report
