"""Multi-scale wavelet analysis and synthesis of F0 contours.

A contour is decomposed onto a ladder of temporal scales with a Mexican-hat
kernel; each scale row is additionally weighted by ``(i + 2.5)**-2.5`` (i the
1-based scale index), and synthesis applies the same weight again before
summing rows. The weighting is deliberately applied on both sides; callers
re-normalize the reconstruction, so only relative scale balance matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from prosodia.errors import ValidationError

DEFAULT_TAU0 = 0.005
DEFAULT_N_SCALES = 10
LADDERS = ("octave", "dj")


@dataclass(frozen=True)
class WaveletParams:
    """Scale-ladder geometry for the transform.

    ``ladder="octave"`` places scale i at ``2**(i+1) * tau0`` (one octave
    apart); ``ladder="dj"`` uses ``s0 * 2**((i-1)*dj)``.
    """

    tau0: float = DEFAULT_TAU0
    n_scales: int = DEFAULT_N_SCALES
    dj: float = 0.5
    s0: float = field(default=2 * DEFAULT_TAU0)
    support_T: float = 5.0
    ladder: str = "octave"

    def __post_init__(self):
        if not self.tau0 > 0:
            raise ValidationError(f"tau0 must be > 0, got {self.tau0}")
        if self.n_scales < 1:
            raise ValidationError(f"n_scales must be >= 1, got {self.n_scales}")
        if not self.s0 > 0:
            raise ValidationError(f"s0 must be > 0, got {self.s0}")
        if not self.support_T > 0:
            raise ValidationError(f"support_T must be > 0, got {self.support_T}")
        if self.ladder not in LADDERS:
            raise ValidationError(f"ladder must be one of {LADDERS}, got {self.ladder!r}")

    def scales(self) -> np.ndarray:
        """Scale values in seconds, index i = 1..n_scales."""
        i = np.arange(1, self.n_scales + 1)
        if self.ladder == "octave":
            return (2.0 ** (i + 1)) * self.tau0
        return self.s0 * 2.0 ** ((i - 1) * self.dj)

    def to_dict(self) -> dict:
        return {
            "tau0": self.tau0,
            "n_scales": self.n_scales,
            "dj": self.dj,
            "s0": self.s0,
            "support_T": self.support_T,
            "ladder": self.ladder,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WaveletParams":
        return cls(
            tau0=float(d.get("tau0", DEFAULT_TAU0)),
            n_scales=int(d.get("n_scales", DEFAULT_N_SCALES)),
            dj=float(d.get("dj", 0.5)),
            s0=float(d.get("s0", 2 * float(d.get("tau0", DEFAULT_TAU0)))),
            support_T=float(d.get("support_T", 5.0)),
            ladder=str(d.get("ladder", "octave")),
        )


@dataclass(frozen=True)
class CwtMatrix:
    """Scale-by-frame coefficient matrix with the ladder that produced it."""

    coeffs: np.ndarray
    params: WaveletParams

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 2 or coeffs.shape[0] != self.params.n_scales:
            raise ValidationError(
                f"coefficient matrix must be {self.params.n_scales} x N, got {coeffs.shape}"
            )
        if not np.isfinite(coeffs).all():
            raise ValidationError("coefficient matrix contains non-finite values")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def n_frames(self) -> int:
        return self.coeffs.shape[1]


def mexican_hat(t):
    """Mexican hat kernel (L2-normalized second Gaussian derivative)."""
    t = np.asarray(t, dtype=np.float64)
    value = (2.0 / (np.sqrt(3.0) * np.pi**0.25)) * (1.0 - t * t) * np.exp(-t * t / 2.0)
    return value if value.ndim else float(value)


def scale_weights(n_scales: int) -> np.ndarray:
    """Per-scale weights (i + 2.5)**-2.5 for 1-based scale indices."""
    i = np.arange(1, n_scales + 1, dtype=np.float64)
    return (i + 2.5) ** -2.5


def _kernel(scale_s: float, params: WaveletParams) -> tuple[np.ndarray, int]:
    """Sampled analysis kernel for one scale and its half-length in samples.

    The kernel is the mirrored wavelet (1/a) * psi((a*T - m*tau0)/a) sampled
    at m = 0..2*half; the half-length is rounded so the kernel stays
    symmetric, which makes the extraction offset exact.
    """
    s = scale_s / params.tau0
    half = int(round(s * params.support_T))
    m = np.arange(2 * half + 1, dtype=np.float64)
    return mexican_hat((half - m) / s) / scale_s, half


def _validate_signal(signal) -> np.ndarray:
    sig = np.asarray(signal, dtype=np.float64)
    if sig.ndim != 1 or sig.size < 1:
        raise ValidationError("signal must be a non-empty 1-D vector")
    if not np.isfinite(sig).all():
        raise ValidationError("signal contains non-finite values")
    return sig


def cwt_decompose(signal, params: WaveletParams = WaveletParams()) -> CwtMatrix:
    """Decompose a signal onto the scale ladder via FFT convolution.

    Per scale: zero-pad the signal by the kernel length minus one, convolve
    circularly on that common length (equal to full linear convolution),
    take the N samples at the kernel-center offset, then weight the row by
    (i+2.5)**-2.5 and by tau0/sqrt(scale) so the sum discretizes the
    scale-normalized convolution integral.
    """
    sig = _validate_signal(signal)
    n = sig.size
    weights = scale_weights(params.n_scales)
    coeffs = np.empty((params.n_scales, n))
    for row, scale in enumerate(params.scales()):
        kernel, half = _kernel(scale, params)
        m = n + 2 * half
        spec = np.fft.rfft(sig, m) * np.fft.rfft(kernel, m)
        full = np.fft.irfft(spec, m)
        coeffs[row] = full[half : half + n]
        coeffs[row] *= weights[row] * params.tau0 / np.sqrt(scale)
    return CwtMatrix(coeffs=coeffs, params=params)


def cwt_decompose_direct(signal, params: WaveletParams = WaveletParams()) -> CwtMatrix:
    """Same contract as :func:`cwt_decompose`, by direct summation.

    No Fourier transforms: each row is an explicit sliding-sum convolution.
    Quadratic in the kernel length, kept as the independent cross-check for
    the FFT path.
    """
    sig = _validate_signal(signal)
    n = sig.size
    weights = scale_weights(params.n_scales)
    coeffs = np.empty((params.n_scales, n))
    for row, scale in enumerate(params.scales()):
        kernel, half = _kernel(scale, params)
        full = np.convolve(sig, kernel, mode="full")
        coeffs[row] = full[half : half + n]
        coeffs[row] *= weights[row] * params.tau0 / np.sqrt(scale)
    return CwtMatrix(coeffs=coeffs, params=params)


def cwt_reconstruct(matrix: CwtMatrix) -> np.ndarray:
    """Approximate synthesis: weighted sum of rows, weight (i+2.5)**-2.5.

    The analysis already applied the same per-row weight, so round trips
    lose amplitude; callers re-normalize before inverting log-F0 stats.
    """
    weights = scale_weights(matrix.params.n_scales)
    return weights @ matrix.coeffs


def export_scalogram_csv(matrix: CwtMatrix, path) -> None:
    """Write the coefficient matrix as CSV: frame index plus one column per scale."""
    k = matrix.params.n_scales
    header = "frame," + ",".join(f"scale{i}" for i in range(1, k + 1))
    lines = [header]
    for frame in range(matrix.n_frames):
        cells = ",".join(f"{v:.12g}" for v in matrix.coeffs[:, frame])
        lines.append(f"{frame},{cells}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_scalogram_csv(path) -> np.ndarray:
    """Parse a scalogram CSV back into a scale-by-frame float64 matrix."""
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or not lines[0].startswith("frame,scale1"):
        raise ValidationError(f"{path}: not a scalogram CSV")
    rows = [[float(v) for v in line.split(",")[1:]] for line in lines[1:]]
    return np.asarray(rows, dtype=np.float64).T
