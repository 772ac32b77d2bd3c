"""Tight-frame analysis operators with A^T A = r I.

Coefficients are laid out fine-to-coarse: detail subbands of scale 1..J,
then the coarse band. Within 2D scales the orientations follow
``ORIENTATIONS_2D`` and each subband is flattened row-major.

The undecimated transforms filter in the frequency domain with periodic
boundaries. Each level applies the orthogonal pair (h, g) upsampled by
2^(j-1) and scaled by 1/sqrt(2), so |H|^2 + |G|^2 = 1 at every frequency
and the frame is Parseval (r = 1).
"""

import abc
import functools
import logging

import numpy as np
import pydantic
import pywt

from frameshrink.errors import FrameConstructionError, ParameterDomainError
from frameshrink.log import _m
from frameshrink.schemas import PropertyCheck, PropertyReport

logger = logging.getLogger(__name__)

DEFAULT_WAVELET = "sym3"
TIGHTNESS_TOL = 1e-10
ORIENTATIONS_2D = ("LH", "HL", "HH")

# The 2-D example operator with A^T A = 4 I.
TOY_FRAME_ROWS = np.array(
    [
        [1.0, 1.0],
        [1.0, 1.0],
        [1.0, -1.0],
        [1.0, -1.0],
    ]
)


class Subband(pydantic.BaseModel):
    id: str
    start: int
    stop: int
    scale: int
    orientation: str | None = None
    coarse: bool = False

    @property
    def size(self) -> int:
        return self.stop - self.start

    @property
    def slice(self) -> slice:
        return slice(self.start, self.stop)


class SubbandLayout(pydantic.BaseModel):
    bands: list[Subband]

    @pydantic.model_validator(mode="after")
    def validate_partition(self):
        position = 0
        for band in self.bands:
            if band.start != position or band.stop <= band.start:
                raise ValueError(f"subband {band.id} breaks the partition at {position}")
            position = band.stop
        return self

    @property
    def m(self) -> int:
        return self.bands[-1].stop if self.bands else 0

    @property
    def detail_bands(self) -> list[Subband]:
        return [band for band in self.bands if not band.coarse]

    @property
    def coarse_band(self) -> Subband | None:
        return next((band for band in self.bands if band.coarse), None)

    def scale_of_coefficients(self) -> np.ndarray:
        scales = np.empty(self.m, dtype=int)
        for band in self.bands:
            scales[band.slice] = band.scale
        return scales


class Frame(abc.ABC):
    """Linear analysis operator A: R^n -> R^m with A^T A = r I."""

    signal_shape: tuple[int, ...]
    m: int
    r: float
    layout: SubbandLayout

    @property
    def n(self) -> int:
        return int(np.prod(self.signal_shape))

    @property
    def name(self) -> str:
        return type(self).__name__

    def _as_signal(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.size != self.n:
            raise ParameterDomainError(f"{self.name} expects {self.n} samples, got {x.size}")
        return x.reshape(self.signal_shape)

    def _as_coefficients(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.size != self.m:
            raise ParameterDomainError(f"{self.name} expects {self.m} coefficients, got {c.size}")
        return c.reshape(self.m)

    def analyze(self, x) -> np.ndarray:
        return self._analyze(self._as_signal(x))

    def adjoint(self, c) -> np.ndarray:
        return self._adjoint(self._as_coefficients(c))

    @abc.abstractmethod
    def _analyze(self, x: np.ndarray) -> np.ndarray:
        pass

    @abc.abstractmethod
    def _adjoint(self, c: np.ndarray) -> np.ndarray:
        pass

    def band_atom_norm(self, band: Subband) -> float:
        """l2 norm of one analysis row in ``band`` (rows within a band share it)."""
        impulse = np.zeros(self.signal_shape)
        impulse.flat[0] = 1.0
        return float(np.linalg.norm(self.analyze(impulse)[band.slice]))


class IdentityFrame(Frame):
    def __init__(self, n: int):
        if n < 1:
            raise ParameterDomainError(f"identity frame needs n >= 1, got {n}")
        self.signal_shape = (n,)
        self.m = n
        self.r = 1.0
        self.layout = SubbandLayout(bands=[Subband(id="identity", start=0, stop=n, scale=1)])

    def _analyze(self, x):
        return x.copy()

    def _adjoint(self, c):
        return c.copy()


class MatrixFrame(Frame):
    def __init__(self, rows):
        rows = np.array(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < rows.shape[1] or rows.shape[1] < 1:
            raise FrameConstructionError(f"expected an m x n matrix with m >= n, got {rows.shape}")
        m, n = rows.shape
        gram = rows.T @ rows
        r = float(np.trace(gram) / n)
        mismatch = float(np.linalg.norm(gram - r * np.eye(n)))
        if r <= 0 or mismatch > TIGHTNESS_TOL * max(1.0, r):
            raise FrameConstructionError(
                f"matrix is not a tight frame: ||A^T A - rI|| = {mismatch:.3e} with r = {r:.6g}"
            )
        self.rows = rows
        self.rows.setflags(write=False)
        self.signal_shape = (n,)
        self.m = m
        self.r = r
        self.layout = SubbandLayout(bands=[Subband(id="matrix", start=0, stop=m, scale=1)])

    def _analyze(self, x):
        return self.rows @ x

    def _adjoint(self, c):
        return self.rows.T @ c


@functools.lru_cache(maxsize=32)
def _filter_pair(wavelet: str) -> tuple[np.ndarray, np.ndarray]:
    try:
        w = pywt.Wavelet(wavelet)
    except ValueError as exc:
        raise ParameterDomainError(f"unknown wavelet {wavelet!r}") from exc
    if not w.orthogonal:
        raise ParameterDomainError(f"wavelet {wavelet!r} is not orthogonal")
    return np.asarray(w.dec_lo, dtype=float), np.asarray(w.dec_hi, dtype=float)


def _level_responses(length: int, level: int, wavelet: str) -> tuple[np.ndarray, np.ndarray]:
    """DFTs of the level-j lowpass/highpass filters, dilated by 2^(j-1), scaled by 1/sqrt(2)."""
    lo, hi = _filter_pair(wavelet)
    dilation = 2 ** (level - 1)
    taps = (np.arange(lo.size) * dilation) % length
    lo_full = np.zeros(length)
    hi_full = np.zeros(length)
    np.add.at(lo_full, taps, lo / np.sqrt(2.0))
    np.add.at(hi_full, taps, hi / np.sqrt(2.0))
    return np.fft.fft(lo_full), np.fft.fft(hi_full)


def _check_dyadic(size: int, scales: int, what: str):
    if scales < 1:
        raise ParameterDomainError(f"need at least one scale, got {scales}")
    if size < 2**scales or size & (size - 1):
        raise ParameterDomainError(
            f"{what} = {size} must be a power of two and at least 2^{scales}"
        )


def _assert_parseval(frame: Frame):
    report = verify_parseval(frame, trials=1)
    if not report.passed:
        worst = ", ".join(f"{check.name}={check.worst:.3e}" for check in report.failures)
        raise FrameConstructionError(
            f"{frame.wavelet} filters do not give a Parseval frame: {worst}"
        )


class Udwt1D(Frame):
    """Undecimated (a trous) wavelet transform of a 1-D signal."""

    def __init__(self, n: int, scales: int, wavelet: str = DEFAULT_WAVELET):
        _check_dyadic(n, scales, "n")
        self.signal_shape = (n,)
        self.scales = scales
        self.wavelet = wavelet
        self.r = 1.0
        self.m = (scales + 1) * n
        self._responses = [_level_responses(n, j, wavelet) for j in range(1, scales + 1)]
        bands = [
            Subband(id=f"d{j}", start=(j - 1) * n, stop=j * n, scale=j)
            for j in range(1, scales + 1)
        ]
        bands.append(
            Subband(id=f"a{scales}", start=scales * n, stop=self.m, scale=scales, coarse=True)
        )
        self.layout = SubbandLayout(bands=bands)
        _assert_parseval(self)

    def _analyze(self, x):
        spectrum = np.fft.fft(x)
        out = []
        for lo, hi in self._responses:
            out.append(np.fft.ifft(hi * spectrum).real)
            spectrum = lo * spectrum
        out.append(np.fft.ifft(spectrum).real)
        return np.concatenate(out)

    def _adjoint(self, c):
        n = self.n
        spectrum = np.fft.fft(c[self.scales * n :])
        for j in range(self.scales, 0, -1):
            lo, hi = self._responses[j - 1]
            detail = np.fft.fft(c[(j - 1) * n : j * n])
            spectrum = np.conj(lo) * spectrum + np.conj(hi) * detail
        return np.fft.ifft(spectrum).real


class Udwt2D(Frame):
    """Separable undecimated wavelet transform of an image (3 orientations per scale)."""

    def __init__(self, h: int, w: int, scales: int, wavelet: str = DEFAULT_WAVELET):
        _check_dyadic(h, scales, "height")
        _check_dyadic(w, scales, "width")
        self.signal_shape = (h, w)
        self.scales = scales
        self.wavelet = wavelet
        self.r = 1.0
        size = h * w
        self.m = (3 * scales + 1) * size
        self._responses = []
        for j in range(1, scales + 1):
            lo0, hi0 = _level_responses(h, j, wavelet)
            lo1, hi1 = _level_responses(w, j, wavelet)
            # Orientation letters: filter along axis 0, then along axis 1.
            self._responses.append(
                (
                    np.outer(lo0, lo1),
                    {
                        "LH": np.outer(lo0, hi1),
                        "HL": np.outer(hi0, lo1),
                        "HH": np.outer(hi0, hi1),
                    },
                )
            )
        bands = []
        start = 0
        for j in range(1, scales + 1):
            for orientation in ORIENTATIONS_2D:
                bands.append(
                    Subband(
                        id=f"{orientation.lower()}{j}",
                        start=start,
                        stop=start + size,
                        scale=j,
                        orientation=orientation,
                    )
                )
                start += size
        bands.append(
            Subband(id=f"ll{scales}", start=start, stop=self.m, scale=scales, coarse=True)
        )
        self.layout = SubbandLayout(bands=bands)
        _assert_parseval(self)

    def _analyze(self, x):
        spectrum = np.fft.fft2(x)
        out = []
        for low, details in self._responses:
            for orientation in ORIENTATIONS_2D:
                out.append(np.fft.ifft2(details[orientation] * spectrum).real.ravel())
            spectrum = low * spectrum
        out.append(np.fft.ifft2(spectrum).real.ravel())
        return np.concatenate(out)

    def _adjoint(self, c):
        shape = self.signal_shape
        size = self.n
        bands = self.layout.bands
        spectrum = np.fft.fft2(c[bands[-1].slice].reshape(shape))
        for j in range(self.scales, 0, -1):
            low, details = self._responses[j - 1]
            total = np.conj(low) * spectrum
            for k, orientation in enumerate(ORIENTATIONS_2D):
                start = (3 * (j - 1) + k) * size
                band = np.fft.fft2(c[start : start + size].reshape(shape))
                total = total + np.conj(details[orientation]) * band
            spectrum = total
        return np.fft.ifft2(spectrum).real


def identity_frame(n: int) -> IdentityFrame:
    return IdentityFrame(n)


def matrix_frame(rows) -> MatrixFrame:
    return MatrixFrame(rows)


def toy_frame() -> MatrixFrame:
    return MatrixFrame(TOY_FRAME_ROWS)


def udwt_1d(n: int, scales: int, wavelet: str = DEFAULT_WAVELET) -> Udwt1D:
    return Udwt1D(n, scales, wavelet)


def udwt_2d(h: int, w: int, scales: int, wavelet: str = DEFAULT_WAVELET) -> Udwt2D:
    return Udwt2D(h, w, scales, wavelet)


def verify_parseval(
    frame: Frame, trials: int = 20, tol: float = TIGHTNESS_TOL, seed: int = 0
) -> PropertyReport:
    """Check A^T A = rI, the adjoint pairing, the norm identity and linearity on random data."""
    if trials < 1:
        raise ParameterDomainError(f"need at least one trial, got {trials}")
    rng = np.random.default_rng(seed)
    parseval, pairing, norms, linearity = [], [], [], []
    for _ in range(trials):
        x = rng.standard_normal(frame.signal_shape)
        z = rng.standard_normal(frame.signal_shape)
        c = rng.standard_normal(frame.m)
        ax = frame.analyze(x)
        parseval.append(np.linalg.norm(frame.adjoint(ax) - frame.r * x) / np.linalg.norm(x))
        lhs = float(ax @ c)
        rhs = float(np.sum(x * frame.adjoint(c)))
        pairing.append(abs(lhs - rhs) / max(1.0, abs(lhs), np.linalg.norm(ax) * np.linalg.norm(c)))
        norms.append(abs(ax @ ax - frame.r * np.sum(x * x)) / (frame.r * np.sum(x * x)))
        alpha, beta = rng.standard_normal(2)
        combo = frame.analyze(alpha * x + beta * z)
        expected = alpha * ax + beta * frame.analyze(z)
        linearity.append(np.linalg.norm(combo - expected) / max(1.0, np.linalg.norm(expected)))

    report = PropertyReport(
        subject=f"{frame.name}(n={frame.n}, m={frame.m}, r={frame.r:g})",
        checks=[
            PropertyCheck(name="parseval", passed=bool(max(parseval) <= tol), worst=parseval),
            PropertyCheck(name="adjoint_pairing", passed=bool(max(pairing) <= tol), worst=pairing),
            PropertyCheck(name="norm_identity", passed=bool(max(norms) <= tol), worst=norms),
            PropertyCheck(name="linearity", passed=bool(max(linearity) <= tol), worst=linearity),
        ],
    )
    logger.info(
        _m(
            "Parseval check finished",
            extra={"frame": report.subject, "passed": report.passed, "max_error": max(parseval)},
        )
    )
    return report
