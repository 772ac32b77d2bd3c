import logging
import time

import numpy as np
from frameshrink import baselines, signals
from frameshrink.frame import Frame
from frameshrink.solver import ProblemSpec, SolverConfig, admm_solve
from payload_models.payloads import ExperimentConfig, Method
from pydantic import BaseModel, ConfigDict

from core.utils import _m, get_extra_info
from services.const import SIGMA_FLOOR

logger = logging.getLogger(__name__)


class MethodOutcome(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    iterations: int
    wall_time: float


class MethodService:
    """Runs one denoising method on one observation with the per-scale lambda schedule."""

    def solver_config(self, config: ExperimentConfig) -> SolverConfig:
        return SolverConfig(mu=config.mu, max_iter=config.max_iter, tol=config.tol)

    def noise_level(self, config: ExperimentConfig, noisy: np.ndarray, frame: Frame, sigma: float):
        if config.estimate_sigma:
            sigma = signals.estimate_noise_sigma(noisy, frame)
        return max(sigma, SIGMA_FLOOR)

    def schedule(self, config: ExperimentConfig, frame: Frame, beta: float, sigma: float):
        return signals.lambda_schedule(beta, sigma, frame.layout, config.coarse_lambda)

    def run(
        self,
        method: Method,
        config: ExperimentConfig,
        frame: Frame,
        noisy: np.ndarray,
        sigma: float,
        beta: float,
    ) -> MethodOutcome:
        sigma = self.noise_level(config, noisy, frame, sigma)
        lam = self.schedule(config, frame, beta, sigma)
        solver_config = self.solver_config(config)

        started = time.perf_counter()
        if method is Method.L1_ADMM:
            result = baselines.l1_denoise(noisy, frame, lam, solver_config)
            x, iterations = result.x, result.iterations
        elif method is Method.NONCONVEX_ADMM:
            spec = ProblemSpec(
                y=noisy,
                frame=frame,
                kind=config.penalty,
                lam=lam,
                a=signals.a_schedule(lam, frame.r),
            )
            result = admm_solve(spec, solver_config)
            x, iterations = result.x, result.iterations
        elif method is Method.DIRECT_THRESHOLD:
            # the prox is only defined up to a = 1/lambda, independent of r
            x = baselines.direct_threshold(
                noisy, frame, lam, signals.a_schedule(lam), config.penalty
            )
            iterations = 0
        else:
            rw = baselines.ReweightConfig.for_noise(
                sigma,
                factor=config.reweight_epsilon_factor,
                outer_iters=config.reweight_outer_iters,
                solver=solver_config,
            )
            result = baselines.reweighted_l1(noisy, frame, lam, rw)
            x, iterations = result.x, result.iterations
        wall_time = (time.perf_counter() - started) * 1000.0

        logger.debug(
            _m(
                "Method finished",
                extra=get_extra_info(
                    {"method": method.value, "beta": beta, "sigma": sigma, "iterations": iterations}
                ),
            )
        )
        return MethodOutcome(x=x, iterations=iterations, wall_time=wall_time)
