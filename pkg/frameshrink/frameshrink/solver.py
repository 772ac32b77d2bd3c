import enum
import logging

import numpy as np
import pydantic

from frameshrink import penalty, prox
from frameshrink.errors import (
    ConfigurationError,
    ConvexityViolationError,
    InputError,
    ParameterDomainError,
)
from frameshrink.frame import Frame
from frameshrink.log import _m
from frameshrink.penalty import PenaltyKind
from frameshrink.schemas import ArrayModel

logger = logging.getLogger(__name__)

CONVEXITY_TOL = 1e-12
DEFAULT_MAX_ITER = 2000
DEFAULT_TOL = 1e-8


class ConvexityStatus(enum.Enum):
    STRICTLY_CONVEX = "StrictlyConvex"
    BOUNDARY_CONVEX = "BoundaryConvex"
    NON_CONVEX = "NonConvex"


class ProblemSpec(ArrayModel):
    """One denoising instance: 0.5 ||y - x||^2 + sum_i lam_i phi([Ax]_i; a_i).

    ``lam`` and ``a`` are broadcast to the frame's coefficient count. A zero
    weight leaves that coefficient unregularised.
    """

    y: np.ndarray
    frame: Frame
    kind: PenaltyKind = PenaltyKind.ABS
    lam: np.ndarray
    a: np.ndarray

    @pydantic.model_validator(mode="before")
    @classmethod
    def normalize_arrays(cls, data: dict) -> dict:
        frame = data.get("frame")
        if not isinstance(frame, Frame):
            raise ParameterDomainError("ProblemSpec needs a Frame instance")
        y = np.array(data.get("y"), dtype=float)
        if y.size != frame.n:
            raise InputError(f"observation has {y.size} samples, frame expects {frame.n}")
        if not np.all(np.isfinite(y)):
            raise InputError("observation contains non-finite values")
        data = dict(data)
        data["y"] = y.reshape(frame.signal_shape)
        for key in ("lam", "a"):
            value = np.asarray(data.get(key, 0.0), dtype=float)
            try:
                data[key] = np.broadcast_to(value, (frame.m,)).copy()
            except ValueError as exc:
                raise InputError(f"{key} of shape {value.shape} does not fit m = {frame.m}") from exc
        kind = PenaltyKind(data.get("kind", PenaltyKind.ABS))
        if np.any(~np.isfinite(data["lam"])) or np.any(data["lam"] < 0):
            raise ParameterDomainError("regularisation weights must be finite and >= 0")
        penalty.check_param(data["a"])
        if kind is PenaltyKind.ABS and np.any(data["a"] != 0):
            raise ParameterDomainError("the abs penalty has no non-convexity parameter; use a = 0")
        return data

    @property
    def r(self) -> float:
        return self.frame.r


class SolverConfig(pydantic.BaseModel):
    mu: float | None = None
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    record_trace: bool = False
    allow_nonconvex: bool = False
    allow_small_mu: bool = False
    log_every: int = 100

    @pydantic.field_validator("mu", "tol")
    def validate_positive(cls, v: float | None) -> float | None:
        if v is not None and not v > 0:
            raise ValueError(f"{v} should be positive.")
        return v

    @pydantic.field_validator("max_iter", "log_every")
    def validate_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"{v} should be a positive integer.")
        return v

    def resolve_mu(self, r: float) -> float:
        return self.mu if self.mu is not None else 2.0 / r


class SolveResult(ArrayModel):
    x: np.ndarray
    u: np.ndarray
    d: np.ndarray
    iterations: int
    converged: bool
    mu: float
    status: ConvexityStatus
    residual_trace: list[float]
    objective_trace: list[float] | None = None


def objective(x, spec: ProblemSpec) -> float:
    x = np.asarray(x, dtype=float).reshape(spec.frame.signal_shape)
    data_term = 0.5 * float(np.sum((spec.y - x) ** 2))
    coefficients = spec.frame.analyze(x)
    return data_term + float(np.sum(spec.lam * penalty.eval(spec.kind, coefficients, spec.a)))


def critical_a(lam: float, r: float) -> float:
    """Largest non-convexity parameter that keeps the objective convex."""
    if not lam > 0 or not r > 0:
        raise ParameterDomainError(f"critical a needs lambda > 0 and r > 0, got {lam}, {r}")
    return 1.0 / (r * lam)


def validate_convexity(spec: ProblemSpec) -> ConvexityStatus:
    ratio = spec.a * spec.r * spec.lam
    worst = float(np.max(ratio)) if ratio.size else 0.0
    if worst < 1.0 - CONVEXITY_TOL:
        return ConvexityStatus.STRICTLY_CONVEX
    if worst <= 1.0 + CONVEXITY_TOL:
        return ConvexityStatus.BOUNDARY_CONVEX
    return ConvexityStatus.NON_CONVEX


def validate_mu(mu: float, r: float, override: bool = False) -> bool:
    if not mu > 0 or not r > 0:
        raise ParameterDomainError(f"mu and r must be positive, got {mu}, {r}")
    if mu > 1.0 / r:
        return True
    if not override:
        raise ConfigurationError(f"mu = {mu:g} must exceed 1/r = {1.0 / r:g} for convergence")
    logger.warning(_m("Running with mu <= 1/r on request", extra={"mu": mu, "r": r}))
    return False


def one_iteration(spec: ProblemSpec, mu: float, u: np.ndarray, d: np.ndarray):
    """One sweep of the x-, u- and d-updates; returns (x, u, d, Ax)."""
    frame = spec.frame
    x = (spec.y + mu * frame.adjoint(u - d)) / (1.0 + mu * frame.r)
    ax = frame.analyze(x)
    u = prox.threshold(spec.kind, ax + d, spec.lam / mu, spec.a)
    d = d - (u - ax)
    return x, u, d, ax


def admm_solve(spec: ProblemSpec, config: SolverConfig | None = None) -> SolveResult:
    config = config or SolverConfig()
    r = spec.r
    mu = config.resolve_mu(r)
    validate_mu(mu, r, override=config.allow_small_mu)

    status = validate_convexity(spec)
    extra = {"frame": spec.frame.name, "kind": spec.kind.value, "mu": mu, "status": status.value}
    if status is ConvexityStatus.NON_CONVEX:
        if not config.allow_nonconvex:
            raise ConfigurationError(
                "a_i exceeds 1/(r lambda_i); the objective is not convex (set allow_nonconvex)"
            )
        logger.warning(_m("Non-convex objective, result is a stationary point only", extra=extra))
    elif status is ConvexityStatus.BOUNDARY_CONVEX:
        logger.warning(_m("Objective convex but not strictly; minimiser may not be unique", extra=extra))

    scaled = spec.a * spec.lam / mu
    if status is ConvexityStatus.NON_CONVEX or config.allow_small_mu:
        if np.any(scaled >= 1.0):
            raise ConvexityViolationError(
                f"mu = {mu:g} must exceed max a_i lambda_i = {float(np.max(spec.a * spec.lam)):g}"
            )
    else:
        assert np.all(scaled < 1.0), "u-subproblem must be strictly convex"

    u = np.zeros(spec.frame.m)
    d = np.zeros(spec.frame.m)
    x_prev = spec.y
    residuals: list[float] = []
    objectives: list[float] | None = [] if config.record_trace else None
    converged = False
    iteration = 0

    logger.info(_m("ADMM started", extra={**extra, "max_iter": config.max_iter, "tol": config.tol}))
    for iteration in range(1, config.max_iter + 1):
        x, u, d, ax = one_iteration(spec, mu, u, d)
        residual = float(np.linalg.norm(u - ax))
        residuals.append(residual)
        if objectives is not None:
            objectives.append(objective(x, spec))

        step = float(np.linalg.norm(x - x_prev))
        x_prev = x
        if iteration % config.log_every == 0:
            logger.debug(
                _m("ADMM progress", extra={"iteration": iteration, "residual": residual, "step": step})
            )
        if residual <= config.tol * (1.0 + np.linalg.norm(u)) and step <= config.tol * (
            1.0 + np.linalg.norm(x)
        ):
            converged = True
            break

    if not converged:
        logger.warning(_m("ADMM hit the iteration limit", extra={**extra, "iterations": iteration}))
    logger.info(
        _m(
            "ADMM finished",
            extra={**extra, "iterations": iteration, "converged": converged, "residual": residuals[-1]},
        )
    )
    return SolveResult(
        x=x,
        u=u,
        d=d,
        iterations=iteration,
        converged=converged,
        mu=mu,
        status=status,
        residual_trace=residuals,
        objective_trace=objectives,
    )
