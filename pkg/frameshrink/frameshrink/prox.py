"""Proximity operators of the sparsity penalties (threshold functions).

prox(y; lam, a) = argmin_x 0.5 (y - x)^2 + lam * phi(x; a)

For a * lam <= 1 this is a continuous threshold: zero on |y| <= lam and,
above the threshold, the root of x + lam * phi'(x) = |y| on (|y| - lam, |y|].
"""

import logging

import numpy as np
import pydantic

from frameshrink import penalty
from frameshrink.errors import ConvexityViolationError, ParameterDomainError
from frameshrink.log import _m
from frameshrink.penalty import PenaltyKind, PenaltyParam

logger = logging.getLogger(__name__)

MAX_ITER = 200
F_TOL = 1e-12
BOUNDARY_TOL = 1e-12


class ProxQuery(pydantic.BaseModel):
    y: float
    lam: float = pydantic.Field(alias="lambda")
    a: PenaltyParam = 0.0

    model_config = pydantic.ConfigDict(populate_by_name=True, frozen=True)

    @pydantic.field_validator("lam")
    def validate_lambda(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"{v} should be a positive threshold weight.")
        return v

    @property
    def is_boundary(self) -> bool:
        """a * lam == 1: convex but not strictly convex scalar objective."""
        return abs(self.a * self.lam - 1.0) <= BOUNDARY_TOL


def prox_abs(y, lam):
    """Soft thresholding, the prox of lam * |x|."""
    lam_arr = np.asarray(lam, dtype=float)
    if np.any(lam_arr <= 0):
        raise ParameterDomainError(f"threshold weight must be positive, got {lam}")
    y = np.asarray(y, dtype=float)
    out = np.sign(y) * np.maximum(np.abs(y) - lam_arr, 0.0)
    return float(out) if out.ndim == 0 else out


def _check_convexity(lam: np.ndarray, a: np.ndarray) -> bool:
    product = a * lam
    worst = float(np.max(product)) if product.size else 0.0
    if worst > 1.0 + BOUNDARY_TOL:
        raise ConvexityViolationError(
            f"a * lambda = {worst:.6g} > 1: the scalar prox objective is not convex"
        )
    return worst >= 1.0 - BOUNDARY_TOL


def _solve_root(kind: PenaltyKind, t: np.ndarray, lam: np.ndarray, a: np.ndarray):
    """Root of f(x) = x + lam * phi'(x) - t on the bracket [t - lam, t].

    Safeguarded Newton: f(t - lam) <= 0 < f(t), a Newton step leaving the
    current bracket is replaced by bisection.
    """
    lo = t - lam
    hi = t.copy()
    x = t.copy()
    stop = F_TOL * np.maximum(1.0, t)
    active = np.ones(t.shape, dtype=bool)

    for _ in range(MAX_ITER):
        if not active.any():
            break
        xa, ta, la, aa = x[active], t[active], lam[active], a[active]
        f = xa + la * penalty.dphi_abs(kind, xa, aa) - ta
        done = np.abs(f) < stop[active]

        lo_a = np.where(f < 0, xa, lo[active])
        hi_a = np.where(f > 0, xa, hi[active])
        fp = 1.0 + la * penalty.d2phi_abs(kind, xa, aa)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = xa - f / fp
        inside = (fp > 0) & (newton > lo_a) & (newton < hi_a)
        step = np.where(inside, newton, 0.5 * (lo_a + hi_a))
        done |= (hi_a - lo_a) <= 4 * np.finfo(float).eps * np.maximum(1.0, ta)

        x[active] = np.where(done, xa, step)
        lo[active] = lo_a
        hi[active] = hi_a
        idx = np.flatnonzero(active)
        active[idx[done]] = False

    return x


def threshold(kind: PenaltyKind, y, lam, a) -> np.ndarray:
    """Vectorised prox of lam * phi(.; a), applied elementwise.

    ``lam`` may be zero for individual entries, which passes ``y`` through.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = y.reshape(-1)
    lam = np.broadcast_to(np.asarray(lam, dtype=float), shape).reshape(-1)
    a = np.broadcast_to(penalty.check_param(a), shape).reshape(-1)
    if np.any(lam < 0):
        raise ParameterDomainError("threshold weights must be non-negative")
    if kind is PenaltyKind.ABS:
        a = np.zeros(y.shape)

    if _check_convexity(lam, a):
        logger.warning(
            _m(
                "a * lambda on the convexity boundary; prox is convex but not strictly",
                extra={"kind": kind.value, "max_a_lambda": float(np.max(a * lam))},
            )
        )

    t = np.abs(y)
    out = np.where(lam == 0, t, 0.0)
    above = (t > lam) & (lam > 0)
    l1 = above & (a == 0)
    out[l1] = t[l1] - lam[l1]
    curved = above & (a > 0)
    if curved.any():
        out[curved] = _solve_root(kind, t[curved], lam[curved], a[curved])
    return (np.sign(y) * out).reshape(shape)


def prox_penalty(q: ProxQuery, kind: PenaltyKind) -> float:
    if q.a * q.lam > 1.0 + BOUNDARY_TOL:
        raise ConvexityViolationError(
            f"a * lambda = {q.a * q.lam:.6g} > 1: the scalar prox objective is not convex"
        )
    return float(threshold(kind, q.y, q.lam, q.a))


def prox_objective(kind: PenaltyKind, x, q: ProxQuery) -> np.ndarray:
    return 0.5 * (q.y - np.asarray(x, dtype=float)) ** 2 + q.lam * penalty.eval(kind, x, q.a)


def oracle_prox(
    q: ProxQuery,
    kind: PenaltyKind,
    x_range: tuple[float, float] | None = None,
    step: float = 1e-5,
) -> float:
    """Brute-force grid argmin of the prox objective (reference for tests).

    The range has to contain the segment between 0 and y, where the
    minimiser lives because phi is even and non-decreasing in |x|.
    """
    if step <= 0:
        raise ParameterDomainError(f"grid step must be positive, got {step}")
    lo, hi = x_range if x_range is not None else (-abs(q.y), abs(q.y))
    if hi < lo:
        raise ParameterDomainError(f"empty search range [{lo}, {hi}]")
    if lo > min(0.0, q.y) or hi < max(0.0, q.y):
        raise ParameterDomainError(f"range [{lo}, {hi}] must contain 0 and y = {q.y}")
    # Grid anchored at 0 so that x = 0 is always a candidate.
    k_lo = int(np.floor(lo / step))
    k_hi = int(np.ceil(hi / step))
    grid = np.arange(k_lo, k_hi + 1, dtype=float) * step
    values = prox_objective(kind, grid, q)
    return float(grid[int(np.argmin(values))])


def threshold_function_table(
    kind: PenaltyKind, lam: float, a: float, y_grid: np.ndarray
) -> np.ndarray:
    """Two-column table (y, prox(y)) for plotting a threshold function."""
    y_grid = np.asarray(y_grid, dtype=float)
    return np.column_stack([y_grid, threshold(kind, y_grid, lam, a)])
