"""Test signals, seeded noise, error metrics, regularisation schedules and PGM I/O."""

import enum
import logging
import math
from pathlib import Path

import numpy as np
import pydantic
from PIL import Image

from frameshrink.errors import InputError, ParameterDomainError, PgmFormatError
from frameshrink.frame import Frame, SubbandLayout

logger = logging.getLogger(__name__)

MIN_SIGNAL_LENGTH = 16
PGM_FORMAT = "PPM"
PGM_MODE = "L"
DEFAULT_PEAK = 255.0
MAD_TO_SIGMA = 0.6745

_JUMPS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCK_HEIGHTS = np.array([4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
_BUMP_HEIGHTS = np.array([4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
_BUMP_WIDTHS = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])


class SignalKind(enum.Enum):
    BLOCKS = "blocks"
    BUMPS = "bumps"
    HEAVISINE = "heavisine"
    DOPPLER = "doppler"


class NoiseSpec(pydantic.BaseModel):
    sigma: float
    seed: int = 0

    @pydantic.field_validator("sigma")
    def validate_sigma(cls, v: float) -> float:
        if not v >= 0 or not math.isfinite(v):
            raise ValueError(f"{v} should be a non-negative noise level.")
        return v

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class LambdaSchedule(pydantic.BaseModel):
    beta: float
    sigma: float
    layout: SubbandLayout
    coarse_lambda: float = 0.0

    @pydantic.field_validator("beta", "sigma")
    def validate_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"{v} should be positive.")
        return v

    @pydantic.field_validator("coarse_lambda")
    def validate_coarse(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"{v} should be non-negative.")
        return v

    def scale_lambda(self, scale: int) -> float:
        return self.beta * self.sigma * 2.0 ** (-scale / 2.0)

    def to_array(self) -> np.ndarray:
        lam = np.empty(self.layout.m)
        for band in self.layout.bands:
            lam[band.slice] = self.coarse_lambda if band.coarse else self.scale_lambda(band.scale)
        return lam


def generate(kind: SignalKind, n: int) -> np.ndarray:
    """Donoho-Johnstone test signal sampled at t = 1/n, 2/n, ..., 1."""
    if n < MIN_SIGNAL_LENGTH:
        raise ParameterDomainError(f"signal length must be >= {MIN_SIGNAL_LENGTH}, got {n}")
    kind = SignalKind(kind)
    t = np.arange(1, n + 1) / n

    if kind is SignalKind.BLOCKS:
        # heaviside(.., 1) keeps one jump per breakpoint even when t hits it exactly
        steps = np.heaviside(t[:, None] - _JUMPS[None, :], 1.0)
        return steps @ _BLOCK_HEIGHTS
    if kind is SignalKind.BUMPS:
        shape = np.abs((t[:, None] - _JUMPS[None, :]) / _BUMP_WIDTHS[None, :])
        return (_BUMP_HEIGHTS[None, :] / (1.0 + shape) ** 4).sum(axis=1)
    if kind is SignalKind.HEAVISINE:
        return 4.0 * np.sin(4.0 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)
    return np.sqrt(t * (1.0 - t)) * np.sin(2.0 * np.pi * 1.05 / (t + 0.05))


def rescale_to_std(x, target: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not target > 0:
        raise ParameterDomainError(f"target standard deviation must be positive, got {target}")
    std = float(np.std(x))
    if std == 0:
        raise InputError("cannot rescale a constant signal")
    return x * (target / std)


def piecewise_smooth_image(h: int = 64, w: int = 64) -> np.ndarray:
    """Synthetic 8-bit test image: smooth background, a rectangle, a disk and a bump."""
    if h < MIN_SIGNAL_LENGTH or w < MIN_SIGNAL_LENGTH:
        raise ParameterDomainError(f"image must be at least {MIN_SIGNAL_LENGTH} pixels per side")
    rows, cols = np.mgrid[0:h, 0:w]
    u = rows / (h - 1)
    v = cols / (w - 1)

    img = 60.0 + 50.0 * u + 30.0 * np.sin(np.pi * v)
    rectangle = (u > 0.15) & (u < 0.45) & (v > 0.1) & (v < 0.5)
    img[rectangle] = 200.0
    disk = (u - 0.65) ** 2 + (v - 0.65) ** 2 < 0.2**2
    img[disk] = 30.0 + 40.0 * v[disk]
    img += 60.0 * np.exp(-((u - 0.25) ** 2 + (v - 0.8) ** 2) / (2 * 0.08**2))
    return np.clip(img, 0.0, 255.0)


def add_awgn(x, spec: NoiseSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if spec.sigma == 0:
        return x.copy()
    return x + spec.sigma * spec.rng().standard_normal(x.shape)


def _check_shapes(x, xhat) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    xhat = np.asarray(xhat, dtype=float)
    if x.shape != xhat.shape:
        raise InputError(f"shape mismatch: {x.shape} vs {xhat.shape}")
    return x, xhat


def mse(x, xhat) -> float:
    x, xhat = _check_shapes(x, xhat)
    return float(np.mean((x - xhat) ** 2))


def rmse(x, xhat) -> float:
    return math.sqrt(mse(x, xhat))


def psnr(img, imghat, peak: float = DEFAULT_PEAK) -> float:
    """Peak signal-to-noise ratio in dB; ``math.inf`` for identical images."""
    if not peak > 0:
        raise ParameterDomainError(f"peak must be positive, got {peak}")
    error = mse(img, imghat)
    if error == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / error)


def lambda_schedule(beta: float, sigma: float, layout: SubbandLayout, coarse_lambda: float = 0.0):
    """lambda_j = beta * sigma * 2^(-j/2) for every coefficient of detail scale j."""
    try:
        schedule = LambdaSchedule(beta=beta, sigma=sigma, layout=layout, coarse_lambda=coarse_lambda)
    except pydantic.ValidationError as exc:
        raise ParameterDomainError(str(exc)) from exc
    return schedule.to_array()


def a_schedule(lam, r: float = 1.0) -> np.ndarray:
    """Critical non-convexity a_i = 1 / (r lambda_i); zero where lambda_i = 0."""
    lam = np.asarray(lam, dtype=float)
    if not r > 0:
        raise ParameterDomainError(f"frame constant must be positive, got {r}")
    safe = np.where(lam > 0, lam, 1.0)
    return np.where(lam > 0, 1.0 / (r * safe), 0.0)


def estimate_noise_sigma(y, frame: Frame) -> float:
    """Robust noise level from the finest detail band (median absolute deviation)."""
    finest = min(frame.layout.detail_bands, key=lambda band: band.scale)
    coefficients = frame.analyze(y)[finest.slice]
    mad = float(np.median(np.abs(coefficients - np.median(coefficients))))
    return mad / MAD_TO_SIGMA / frame.band_atom_norm(finest)


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit grayscale PGM image into a float array of shape (height, width)."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format != PGM_FORMAT or img.mode != PGM_MODE:
                raise PgmFormatError(
                    f"{path}: {img.format} image in mode {img.mode} not supported, "
                    "expected 8-bit grayscale PGM"
                )
            img.load()
            return np.asarray(img, dtype=float)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such image") from exc
    except (OSError, ValueError, SyntaxError) as exc:
        raise PgmFormatError(f"{path}: {exc}") from exc


def write_pgm(path, img) -> Path:
    """Write an image as binary 8-bit PGM; values are rounded and clipped to [0, 255]."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise InputError(f"PGM images are 2-D, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise InputError("image contains non-finite values")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    Image.fromarray(pixels).save(path, format=PGM_FORMAT)
    return path
