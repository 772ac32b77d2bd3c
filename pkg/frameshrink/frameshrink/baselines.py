"""Reference denoisers the non-convex ADMM solver is compared against."""

import logging

import numpy as np
import pydantic

from frameshrink import prox
from frameshrink.errors import InputError
from frameshrink.frame import Frame
from frameshrink.log import _m
from frameshrink.penalty import PenaltyKind
from frameshrink.solver import ProblemSpec, SolverConfig, SolveResult, admm_solve

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_FACTOR = 0.1
DEFAULT_OUTER_ITERS = 4


class ReweightConfig(pydantic.BaseModel):
    epsilon: float
    outer_iters: int = DEFAULT_OUTER_ITERS
    solver: SolverConfig = SolverConfig()

    @pydantic.field_validator("epsilon")
    def validate_epsilon(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"{v} should be a positive weight stabilizer.")
        return v

    @pydantic.field_validator("outer_iters")
    def validate_outer_iters(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"{v} should be at least one outer iteration.")
        return v

    @classmethod
    def for_noise(
        cls,
        sigma: float,
        factor: float = DEFAULT_EPSILON_FACTOR,
        outer_iters: int = DEFAULT_OUTER_ITERS,
        solver: SolverConfig | None = None,
    ) -> "ReweightConfig":
        # sigma = 0 still needs a positive stabilizer
        epsilon = max(factor * sigma, 1e-8)
        return cls(epsilon=epsilon, outer_iters=outer_iters, solver=solver or SolverConfig())


def l1_denoise(y, frame: Frame, lam, config: SolverConfig | None = None) -> SolveResult:
    spec = ProblemSpec(y=y, frame=frame, kind=PenaltyKind.ABS, lam=lam, a=0.0)
    return admm_solve(spec, config)


def direct_threshold(y, frame: Frame, lam, a, kind: PenaltyKind) -> np.ndarray:
    """Shrink the noisy analysis coefficients once and reconstruct with (1/r) A^T."""
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise InputError("observation contains non-finite values")
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (frame.m,))
    coefficients = frame.analyze(y)
    if not np.any(lam):
        return y.reshape(frame.signal_shape).copy()
    if kind is PenaltyKind.ABS:
        a = 0.0
    shrunk = prox.threshold(kind, coefficients, lam, a)
    return frame.adjoint(shrunk) / frame.r


def reweight(coefficients: np.ndarray, epsilon: float) -> np.ndarray:
    return 1.0 / (np.abs(coefficients) + epsilon)


def reweighted_l1(y, frame: Frame, lam, rw: ReweightConfig) -> SolveResult:
    """Iteratively reweighted l1 in the analysis domain.

    The first pass (w = 1) is plain l1. Later passes use w_i = 1 / (|[Ax]_i| + eps),
    so a very large eps gives nearly uniform weights 1/eps.
    """
    lam = np.broadcast_to(np.asarray(lam, dtype=float), (frame.m,))
    weights = np.ones(frame.m)
    total_iterations = 0
    result = None
    for outer in range(rw.outer_iters):
        result = l1_denoise(y, frame, lam * weights, rw.solver)
        total_iterations += result.iterations
        weights = reweight(frame.analyze(result.x), rw.epsilon)
        logger.debug(
            _m(
                "Reweighting pass done",
                extra={
                    "outer": outer,
                    "iterations": result.iterations,
                    "min_weight": float(weights.min()),
                    "max_weight": float(weights.max()),
                },
            )
        )
    return result.model_copy(update={"iterations": total_iterations})
