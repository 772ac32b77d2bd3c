import enum
import json
import math
from pathlib import Path

import pydantic
from dotenv import dotenv_values
from frameshrink.errors import ConfigurationError
from frameshrink.penalty import PenaltyKind
from frameshrink.signals import SignalKind
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from services.const import (
    CSV_FLOAT_FORMAT,
    DEFAULT_BETA_GRID,
    DEFAULT_PEAK,
    DEFAULT_SNR_SCALE,
)


class ExperimentMode(enum.Enum):
    DENOISE1D = "denoise1d"
    DENOISE2D = "denoise2d"
    SWEEP_SIGMA = "sweep_sigma"
    SWEEP_LAMBDA = "sweep_lambda"
    COMPARE = "compare"
    VERIFY = "verify"


class Method(enum.Enum):
    L1_ADMM = "l1_admm"
    NONCONVEX_ADMM = "nonconvex_admm"
    DIRECT_THRESHOLD = "direct_threshold"
    REWEIGHTED_L1 = "reweighted_l1"


ALL_METHODS = list(Method)
SWEEP_LAMBDA_METHODS = [Method.L1_ADMM, Method.NONCONVEX_ADMM]


def _split_list(v):
    """Accept JSON lists and comma-separated strings for list-valued keys."""
    if not isinstance(v, str):
        return v
    text = v.strip()
    if text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{v} is not a valid JSON list.") from exc
    return [item.strip() for item in text.split(",") if item.strip()]


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: ExperimentMode = ExperimentMode.COMPARE
    dimension: int = 1

    signal: SignalKind = SignalKind.BLOCKS
    image: Path | None = None
    n: int = 1024
    height: int = 64
    width: int = 64
    scales: int = 4
    wavelet: str = "sym3"
    snr_scale: float | None = DEFAULT_SNR_SCALE

    sigmas: list[float] = [4.0]
    estimate_sigma: bool = False
    beta_l1: float | None = None
    beta_nonconvex: float | None = None
    beta_threshold: float | None = None
    beta_reweighted: float | None = None
    beta_grid: list[float] = DEFAULT_BETA_GRID
    coarse_lambda: float = 0.0

    penalty: PenaltyKind = PenaltyKind.ATAN
    methods: list[Method] | None = None
    mu: float | None = None
    max_iter: int = 500
    tol: float = 1e-6
    reweight_outer_iters: int = 4
    reweight_epsilon_factor: float = 0.1

    trials: int = 15
    seed: int = 0
    workers: int = 1
    peak: float = DEFAULT_PEAK
    toy_a: float = 0.25

    output: Path | None = None
    image_dir: Path | None = None
    timestamp: bool = True

    @field_validator("sigmas", "beta_grid", "methods", mode="before")
    def split_lists(cls, v):
        return _split_list(v)

    @field_validator("sigmas")
    def validate_sigmas(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("sigma grid should not be empty.")
        if any(not math.isfinite(s) or s < 0 for s in v):
            raise ValueError(f"{v} should contain finite non-negative noise levels.")
        return v

    @field_validator("beta_grid")
    def validate_beta_grid(cls, v: list[float]) -> list[float]:
        if not v or any(not b > 0 for b in v):
            raise ValueError(f"{v} should be a non-empty list of positive values.")
        return v

    @field_validator(
        "beta_l1", "beta_nonconvex", "beta_threshold", "beta_reweighted", "mu", "snr_scale"
    )
    def validate_optional_positive(cls, v: float | None) -> float | None:
        if v is not None and not v > 0:
            raise ValueError(f"{v} should be positive.")
        return v

    @field_validator("tol", "peak", "reweight_epsilon_factor")
    def validate_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"{v} should be positive.")
        return v

    @field_validator("trials", "max_iter", "scales", "reweight_outer_iters", "workers")
    def validate_positive_int(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"{v} should be a positive integer.")
        return v

    @field_validator("n", "height", "width")
    def validate_power_of_two(cls, v: int) -> int:
        if v < 16 or v & (v - 1):
            raise ValueError(f"{v} should be a power of two of at least 16.")
        return v

    @field_validator("dimension")
    def validate_dimension(cls, v: int) -> int:
        if v not in (1, 2):
            raise ValueError(f"{v} should be 1 or 2.")
        return v

    @field_validator("coarse_lambda", "toy_a")
    def validate_non_negative(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"{v} should be non-negative.")
        return v

    @field_validator("penalty")
    def validate_penalty(cls, v: PenaltyKind) -> PenaltyKind:
        if v is PenaltyKind.ABS:
            raise ValueError("the non-convex method needs a curved penalty (rational, log, atan).")
        return v

    @model_validator(mode="after")
    def validate_mode(self):
        if self.mode is ExperimentMode.DENOISE1D and self.dimension != 1:
            raise ValueError("denoise1d runs on 1-D signals.")
        if self.mode is ExperimentMode.DENOISE2D and self.dimension != 2:
            raise ValueError("denoise2d runs on images.")
        if self.dimension == 1 and self.n < 2**self.scales:
            raise ValueError(f"n = {self.n} is too short for {self.scales} scales.")
        too_small = min(self.height, self.width) < 2**self.scales
        if self.dimension == 2 and self.image is None and too_small:
            raise ValueError(f"image is too small for {self.scales} scales.")
        return self

    @classmethod
    def load(
        cls, path: Path | None = None, defaults: dict | None = None, **overrides
    ) -> "ExperimentConfig":
        """Defaults, then config file values (key=value lines), then non-None overrides."""
        values = dict(defaults or {})
        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigurationError(f"config file {path} does not exist")
            values |= {
                key.strip().lower(): value
                for key, value in dotenv_values(path).items()
                if value is not None and value.strip() != ""
            }
        values.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls(**values)
        except pydantic.ValidationError as exc:
            raise ConfigurationError.from_pydantic_validation_error(exc) from exc

    @property
    def resolved_methods(self) -> list[Method]:
        if self.methods:
            return list(self.methods)
        if self.mode is ExperimentMode.SWEEP_LAMBDA:
            return list(SWEEP_LAMBDA_METHODS)
        return list(ALL_METHODS)

    @property
    def metric_name(self) -> str:
        return "rmse" if self.dimension == 1 else "psnr"

    @property
    def source(self) -> str:
        if self.dimension == 1:
            return self.signal.value
        return self.image.name if self.image is not None else "synthetic"

    def fixed_beta(self, method: Method) -> float | None:
        return {
            Method.L1_ADMM: self.beta_l1,
            Method.NONCONVEX_ADMM: self.beta_nonconvex,
            Method.DIRECT_THRESHOLD: self.beta_threshold,
            Method.REWEIGHTED_L1: self.beta_reweighted,
        }[method]


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, CSV_FLOAT_FORMAT)
    return str(value)


class CsvRow(BaseModel):
    @classmethod
    def columns(cls) -> list[str]:
        return list(cls.model_fields)

    def as_csv_row(self) -> list[str]:
        return [format_value(getattr(self, name)) for name in self.columns()]


class ConfigEcho(CsvRow):
    """Columns that let a single row be reproduced without the config file."""

    source: str
    size: str
    scales: int
    penalty: PenaltyKind
    mu: float
    seed: int

    @classmethod
    def echo_values(cls, config: ExperimentConfig, size: str, mu: float) -> dict:
        """`mu` is the value the solver actually runs with, after the 2/r default."""
        return {
            "source": config.source,
            "size": size,
            "scales": config.scales,
            "penalty": config.penalty,
            "mu": mu,
            "seed": config.seed,
        }


class TrialRow(ConfigEcho):
    trial: int
    sigma: float
    method: Method
    beta: float
    metric_name: str
    metric: float | None = None
    iterations: int = 0
    wall_time: float | None = None
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        own = [
            "trial",
            "sigma",
            "method",
            "beta",
            "metric_name",
            "metric",
            "iterations",
            "wall_time",
            "error",
        ]
        return own + list(ConfigEcho.model_fields)


class AggregateRow(ConfigEcho):
    sigma: float
    method: Method
    beta: float
    metric_name: str
    mean_metric: float | None = None
    std_metric: float | None = None
    trials: int
    failures: int = 0

    @classmethod
    def columns(cls) -> list[str]:
        own = [
            "sigma",
            "method",
            "beta",
            "metric_name",
            "mean_metric",
            "std_metric",
            "trials",
            "failures",
        ]
        return own + list(ConfigEcho.model_fields)


class VerifyRow(CsvRow):
    suite: str
    subject: str
    check: str
    passed: bool
    worst: float = 0.0
    detail: str = ""
