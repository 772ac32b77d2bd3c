import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from frameshrink import signals, solver
from frameshrink.errors import ConfigurationError, FrameshrinkError
from frameshrink.frame import Frame, udwt_1d, udwt_2d
from frameshrink.signals import NoiseSpec
from payload_models.payloads import (
    AggregateRow,
    ConfigEcho,
    ExperimentConfig,
    ExperimentMode,
    Method,
    TrialRow,
    VerifyRow,
)
from pydantic import BaseModel, ConfigDict

from core.config import settings
from core.utils import _m, context, get_extra_info
from services.const import IMAGE_SUFFIX
from services.method_service import MethodService
from services.report_service import ReportService
from services.verify_service import VerifyService

logger = logging.getLogger(__name__)


class ExperimentReport(BaseModel):
    mode: ExperimentMode
    path: Path
    rows: list[TrialRow | AggregateRow | VerifyRow]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows if isinstance(row, VerifyRow))


class Workload(BaseModel):
    """Everything a trial needs besides its own coordinates."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: ExperimentConfig
    frame: Frame
    clean: np.ndarray
    echo: dict


class ExperimentService:
    def __init__(
        self,
        method_service: MethodService,
        report_service: ReportService,
        verify_service: VerifyService,
    ):
        self.method_service = method_service
        self.report_service = report_service
        self.verify_service = verify_service

    def prepare(self, config: ExperimentConfig) -> Workload:
        if config.dimension == 1:
            clean = signals.generate(config.signal, config.n)
            if config.snr_scale is not None:
                clean = signals.rescale_to_std(clean, config.snr_scale)
            frame = udwt_1d(config.n, config.scales, config.wavelet)
            size = str(config.n)
        else:
            if config.image is not None:
                clean = signals.read_pgm(config.image)
            else:
                clean = signals.piecewise_smooth_image(config.height, config.width)
            frame = udwt_2d(*clean.shape, config.scales, config.wavelet)
            size = "x".join(str(s) for s in clean.shape)

        mu = self.method_service.solver_config(config).resolve_mu(frame.r)
        solver.validate_mu(mu, frame.r)
        return Workload(
            config=config, frame=frame, clean=clean, echo=ConfigEcho.echo_values(config, size, mu)
        )

    def trial_seed(self, config: ExperimentConfig, sigma_index: int, trial: int) -> int:
        sequence = np.random.SeedSequence(entropy=config.seed, spawn_key=(sigma_index, trial))
        return int(sequence.generate_state(1, dtype=np.uint64)[0])

    def observe(self, work: Workload, sigma_index: int, sigma: float, trial: int) -> np.ndarray:
        seed = self.trial_seed(work.config, sigma_index, trial)
        return signals.add_awgn(work.clean, NoiseSpec(sigma=sigma, seed=seed))

    def score(self, config: ExperimentConfig, clean: np.ndarray, estimate: np.ndarray) -> float:
        if config.dimension == 1:
            return signals.rmse(clean, estimate)
        return signals.psnr(clean, estimate, config.peak)

    def tune_beta(self, work: Workload, sigma_index: int, sigma: float, method: Method) -> float:
        """Beta with the lowest error on trial 0, unless the config fixes it."""
        fixed = work.config.fixed_beta(method)
        if fixed is not None:
            return fixed

        context.set(f"tune {method.value} sigma={sigma:g}")
        noisy = self.observe(work, sigma_index, sigma, 0)
        best_beta, best_error = None, math.inf
        for beta in work.config.beta_grid:
            try:
                outcome = self.method_service.run(method, work.config, work.frame, noisy, sigma, beta)
            except FrameshrinkError as exc:
                logger.warning(
                    _m("Beta candidate failed", extra=get_extra_info({"beta": beta, "error": str(exc)}))
                )
                continue
            error = signals.mse(work.clean, outcome.x)
            if error < best_error:
                best_beta, best_error = beta, error

        if best_beta is None:
            raise ConfigurationError(f"no beta in {work.config.beta_grid} works for {method.value}")
        logger.info(
            _m(
                "Beta tuned",
                extra=get_extra_info({"method": method.value, "sigma": sigma, "beta": best_beta}),
            )
        )
        return best_beta

    def run_trial(
        self,
        work: Workload,
        sigma_index: int,
        sigma: float,
        trial: int,
        method: Method,
        beta: float,
    ) -> tuple[TrialRow, np.ndarray | None]:
        config = work.config
        context.set(f"{config.mode.value} sigma={sigma:g} trial={trial}")
        row = {
            "trial": trial,
            "sigma": sigma,
            "method": method,
            "beta": beta,
            "metric_name": config.metric_name,
            **work.echo,
        }
        noisy = self.observe(work, sigma_index, sigma, trial)
        try:
            outcome = self.method_service.run(method, config, work.frame, noisy, sigma, beta)
        except FrameshrinkError as exc:
            logger.error(
                _m("Method failed", extra=get_extra_info({"method": method.value, "error": str(exc)}))
            )
            return TrialRow(**row, error=str(exc)), None

        return (
            TrialRow(
                **row,
                metric=self.score(config, work.clean, outcome.x),
                iterations=outcome.iterations,
                wall_time=outcome.wall_time if config.timestamp else None,
            ),
            outcome.x,
        )

    def _map(self, workers: int, fn, jobs: list[tuple]) -> list:
        if workers <= 1:
            return [fn(*job) for job in jobs]
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(fn, *job) for job in jobs]
            return [future.result() for future in futures]

    def tuned_betas(self, work: Workload) -> dict[tuple[int, Method], float]:
        keys = [
            (sigma_index, method)
            for sigma_index in range(len(work.config.sigmas))
            for method in work.config.resolved_methods
        ]
        jobs = [(work, i, work.config.sigmas[i], method) for i, method in keys]
        return dict(zip(keys, self._map(work.config.workers, self.tune_beta, jobs)))

    def run_jobs(self, work: Workload, jobs: list[tuple]) -> list[TrialRow]:
        """Jobs are (sigma_index, sigma, trial, method, beta); rows come back in a fixed order."""
        method_order = {method: i for i, method in enumerate(work.config.resolved_methods)}
        results = self._map(work.config.workers, self.run_trial, [(work, *job) for job in jobs])
        keyed = sorted(
            zip(jobs, (row for row, _ in results)),
            key=lambda item: (item[0][0], item[0][2], method_order[item[0][3]], item[0][4]),
        )
        return [row for _, row in keyed]

    def run_compare(self, config: ExperimentConfig) -> list[TrialRow]:
        work = self.prepare(config)
        betas = self.tuned_betas(work)
        jobs = [
            (sigma_index, sigma, trial, method, betas[sigma_index, method])
            for sigma_index, sigma in enumerate(config.sigmas)
            for trial in range(config.trials)
            for method in config.resolved_methods
        ]
        return self.run_jobs(work, jobs)

    def aggregate(self, rows: list[TrialRow]) -> list[AggregateRow]:
        groups: dict[tuple, list[TrialRow]] = {}
        for row in rows:
            groups.setdefault((row.sigma, row.beta, row.method), []).append(row)

        echo_fields = list(ConfigEcho.model_fields)
        aggregated = []
        for (sigma, beta, method), members in groups.items():
            metrics = np.array([row.metric for row in members if row.metric is not None])
            finite = metrics.size > 0 and bool(np.all(np.isfinite(metrics)))
            aggregated.append(
                AggregateRow(
                    sigma=sigma,
                    method=method,
                    beta=beta,
                    metric_name=members[0].metric_name,
                    mean_metric=float(metrics.mean()) if metrics.size else None,
                    std_metric=float(metrics.std()) if finite else None,
                    trials=len(members),
                    failures=sum(1 for row in members if row.error),
                    **{name: getattr(members[0], name) for name in echo_fields},
                )
            )
        return aggregated

    def run_sweep_sigma(self, config: ExperimentConfig) -> list[AggregateRow]:
        return self.aggregate(self.run_compare(config))

    def run_sweep_lambda(self, config: ExperimentConfig) -> list[AggregateRow]:
        work = self.prepare(config)
        jobs = [
            (sigma_index, sigma, trial, method, beta)
            for sigma_index, sigma in enumerate(config.sigmas)
            for trial in range(config.trials)
            for method in config.resolved_methods
            for beta in config.beta_grid
        ]
        rows = self.run_jobs(work, jobs)
        rows.sort(key=lambda row: (config.sigmas.index(row.sigma), row.beta))
        return self.aggregate(rows)

    def single_trial(self, config: ExperimentConfig):
        """Trial 0 at the first noise level, every method with its tuned beta."""
        work = self.prepare(config)
        sigma = config.sigmas[0]
        noisy = self.observe(work, 0, sigma, 0)
        rows, estimates = [], {}
        for method in config.resolved_methods:
            beta = self.tune_beta(work, 0, sigma, method)
            row, estimate = self.run_trial(work, 0, sigma, 0, method, beta)
            rows.append(row)
            estimates[method] = estimate
            logger.info(
                _m(
                    "Denoised",
                    extra=get_extra_info(
                        {"method": method.value, "beta": beta, row.metric_name: row.metric}
                    ),
                )
            )
        return work, noisy, rows, estimates

    def run_denoise1d(self, config: ExperimentConfig, path: Path) -> list[TrialRow]:
        work, noisy, rows, estimates = self.single_trial(config)
        methods = list(estimates)
        header = ["index", "clean", "noisy", *(method.value for method in methods)]
        table = [
            [i, float(work.clean[i]), float(noisy[i])]
            + [None if estimates[m] is None else float(estimates[m][i]) for m in methods]
            for i in range(work.clean.size)
        ]
        self.report_service.write_table(path, header, table, config.timestamp)
        return rows

    def run_denoise2d(self, config: ExperimentConfig, path: Path) -> list[TrialRow]:
        work, noisy, rows, estimates = self.single_trial(config)
        if config.image_dir is not None:
            image_dir = Path(config.image_dir)
            signals.write_pgm(image_dir / f"clean{IMAGE_SUFFIX}", work.clean)
            signals.write_pgm(image_dir / f"noisy{IMAGE_SUFFIX}", noisy)
            for method, estimate in estimates.items():
                if estimate is not None:
                    signals.write_pgm(image_dir / f"{method.value}{IMAGE_SUFFIX}", estimate)
        self.report_service.write_rows(path, rows, config.timestamp)
        return rows

    def output_path(self, config: ExperimentConfig) -> Path:
        if config.output is not None:
            return Path(config.output)
        return settings.DEFAULT_OUTPUT_DIR / f"{config.mode.value}.csv"

    def run(self, config: ExperimentConfig) -> ExperimentReport:
        path = self.output_path(config)
        logger.info(
            _m(
                "Experiment started",
                extra=get_extra_info(
                    {
                        "mode": config.mode.value,
                        "sigmas": config.sigmas,
                        "trials": config.trials,
                        "methods": [m.value for m in config.resolved_methods],
                    }
                ),
            )
        )
        if config.mode is ExperimentMode.DENOISE1D:
            rows = self.run_denoise1d(config, path)
        elif config.mode is ExperimentMode.DENOISE2D:
            rows = self.run_denoise2d(config, path)
        else:
            runner = {
                ExperimentMode.COMPARE: self.run_compare,
                ExperimentMode.SWEEP_SIGMA: self.run_sweep_sigma,
                ExperimentMode.SWEEP_LAMBDA: self.run_sweep_lambda,
                ExperimentMode.VERIFY: self.verify_service.run,
            }[config.mode]
            rows = runner(config)
            self.report_service.write_rows(path, rows, config.timestamp)
        return ExperimentReport(mode=config.mode, path=path, rows=rows)
