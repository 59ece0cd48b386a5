"""Windowed STFT/iSTFT, mel filterbank, and multi-resolution magnitude features.

Frame geometry is shared with the rest of the package: in centered mode frame m
describes the neighborhood of sample m*hop + hop//2, the same anchor used when
frame-level features are interpolated to sample rate. A signal of length L
yields ceil(L/hop) centered frames, so framed features and STFTs of the same
signal always line up.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import as_strided
from scipy import signal as sps

from .types import Waveform

WINDOW_FAMILIES = ("hann", "hamming", "blackman", "blackmanharris")

# Denominator floor when normalizing overlap-added window energy; positions
# below it receive zero output (only ever hit inside the synthetic padding).
_OLA_EPS = 1e-11


@functools.lru_cache(maxsize=32)
def _window(name: str, length: int) -> np.ndarray:
    w = sps.get_window(name, length, fftbins=True)
    w.flags.writeable = False
    return w


@dataclass(frozen=True)
class SpectralConfig:
    """STFT parameters: FFT size (power of two), hop, window length and family."""

    fft_size: int = 2048
    hop_size: int = 512
    win_size: int = 2048
    window: str = "hann"
    center: bool = True

    def __post_init__(self):
        if self.fft_size <= 0 or (self.fft_size & (self.fft_size - 1)) != 0:
            raise ValueError(f"fft_size must be a power of two, got {self.fft_size}")
        if not (0 < self.hop_size <= self.win_size <= self.fft_size):
            raise ValueError(
                "need 0 < hop_size <= win_size <= fft_size, got "
                f"hop={self.hop_size} win={self.win_size} fft={self.fft_size}"
            )
        if self.window not in WINDOW_FAMILIES:
            raise ValueError(f"unknown window {self.window!r}, expected one of {WINDOW_FAMILIES}")

    @property
    def n_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def pad_left(self) -> int:
        """Samples of left zero-padding; frame m starts at m*hop - pad_left."""
        return self.fft_size // 2 - self.hop_size // 2 if self.center else 0

    def window_array(self) -> np.ndarray:
        """Periodic window of win_size samples, zero-padded centered to fft_size."""
        w = _window(self.window, self.win_size)
        if self.win_size == self.fft_size:
            return w
        padded = np.zeros(self.fft_size)
        off = (self.fft_size - self.win_size) // 2
        padded[off : off + self.win_size] = w
        return padded

    def is_cola(self) -> bool:
        """True when the window/hop pair satisfies constant overlap-add."""
        return bool(
            sps.check_COLA(_window(self.window, self.win_size), self.win_size, self.win_size - self.hop_size)
        )

    def n_frames(self, n_samples: int) -> int:
        """Frame count for a signal of the given length under this config."""
        if self.center:
            return max(1, math.ceil(n_samples / self.hop_size))
        if n_samples < self.fft_size:
            raise ValueError("signal shorter than fft_size with centering disabled")
        return 1 + (n_samples - self.fft_size) // self.hop_size


def default_spectral(sample_rate: int) -> SpectralConfig:
    """Per-rate defaults: 2048/512 at 44.1 kHz-class rates, 1024/256 below 32 kHz."""
    if sample_rate >= 32000:
        return SpectralConfig(fft_size=2048, hop_size=512, win_size=2048)
    return SpectralConfig(fft_size=1024, hop_size=256, win_size=1024)


def multi_resolution_configs() -> list[SpectralConfig]:
    """The three built-in resolutions used for multi-scale magnitude features."""
    return [
        SpectralConfig(fft_size=n, hop_size=n // 4, win_size=n) for n in (512, 1024, 2048)
    ]


def _frame_signal(
    x: np.ndarray, cfg: SpectralConfig, pad_mode: str = "constant"
) -> tuple[np.ndarray, int]:
    """Return (frames x fft_size view, pad_left) of the padded signal."""
    fft, hop = cfg.fft_size, cfg.hop_size
    pad_left = cfg.pad_left
    n_frames = cfg.n_frames(len(x))
    if cfg.center:
        end = (n_frames - 1) * hop + fft
        pad_right = max(0, end - (pad_left + len(x)))
        if pad_mode == "reflect" and max(pad_left, pad_right) > len(x) - 1:
            pad_mode = "constant"  # reflection is undefined past the signal length
        xp = np.pad(x, (pad_left, pad_right), mode=pad_mode)
    else:
        xp = np.ascontiguousarray(x)
    stride = xp.strides[0]
    frames = as_strided(xp, shape=(n_frames, fft), strides=(hop * stride, stride))
    return frames, pad_left


def stft(x: Waveform, cfg: SpectralConfig, pad_mode: str = "constant") -> np.ndarray:
    """Complex spectrogram, shape (frames, fft_size//2 + 1).

    pad_mode chooses how centering extends the signal past its edges: zeros by
    default, or "reflect" for measurement tasks where the step to silence
    would smear energy across the spectrum.
    """
    if len(x) == 0:
        raise ValueError("cannot take the STFT of an empty signal")
    frames, _ = _frame_signal(x.samples, cfg, pad_mode)
    return np.fft.rfft(frames * cfg.window_array(), n=cfg.fft_size, axis=1)


def istft(S: np.ndarray, cfg: SpectralConfig, out_len: int) -> np.ndarray:
    """Overlap-add inverse STFT with window-energy normalization.

    Requires a COLA-satisfying config; output has length exactly out_len.
    """
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[1] != cfg.n_bins:
        raise ValueError(f"spectrogram must have {cfg.n_bins} bins, got shape {S.shape}")
    if not cfg.is_cola():
        raise ValueError(
            f"window={cfg.window!r} win={cfg.win_size} hop={cfg.hop_size} does not satisfy "
            "constant overlap-add; inverse STFT would not be exact"
        )
    if out_len < 0:
        raise ValueError("out_len must be non-negative")
    fft, hop = cfg.fft_size, cfg.hop_size
    w = cfg.window_array()
    n_frames = S.shape[0]
    total = (n_frames - 1) * hop + fft
    frames = np.fft.irfft(S, n=fft, axis=1) * w

    acc = np.zeros(total)
    wsum = np.zeros(total)
    w2 = w * w
    for m in range(n_frames):
        s = m * hop
        acc[s : s + fft] += frames[m]
        wsum[s : s + fft] += w2
    out = np.where(wsum > _OLA_EPS, acc / np.maximum(wsum, _OLA_EPS), 0.0)

    out = out[cfg.pad_left :]
    if len(out) >= out_len:
        return np.ascontiguousarray(out[:out_len])
    return np.pad(out, (0, out_len - len(out)))


def multi_resolution_spectrograms(x: Waveform, cfgs: list[SpectralConfig]) -> list[np.ndarray]:
    """Magnitude STFT under each config, order preserved."""
    if not cfgs:
        raise ValueError("need at least one spectral config")
    return [np.abs(stft(x, cfg)) for cfg in cfgs]


# ---------------------------------------------------------------------------
# Mel filterbank (Slaney scale, area-normalized) and log-mel extraction.
#
# Scale: mel(f) = f / (200/3) for f < 1000 Hz, else
#        mel(f) = 15 + ln(f/1000) / (ln(6.4)/27).
# Filters: n_mels triangles with vertices at n_mels+2 equally mel-spaced
# frequencies between f_min and f_max, each scaled by 2/(f[i+2] - f[i]).
# Energies are filterbank-weighted *magnitudes* (not powers), so scaling the
# waveform by c shifts every above-floor log-mel entry by exactly log(c).
# ---------------------------------------------------------------------------

_MEL_BREAK_HZ = 1000.0
_MEL_SLOPE = 200.0 / 3.0
_MEL_LOG_STEP = math.log(6.4) / 27.0


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    mel = f / _MEL_SLOPE
    above = f >= _MEL_BREAK_HZ
    mel = np.where(above, 15.0 + np.log(np.maximum(f, _MEL_BREAK_HZ) / _MEL_BREAK_HZ) / _MEL_LOG_STEP, mel)
    return mel


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    f = m * _MEL_SLOPE
    above = m >= 15.0
    f = np.where(above, _MEL_BREAK_HZ * np.exp(_MEL_LOG_STEP * (m - 15.0)), f)
    return f


@dataclass(frozen=True)
class MelConfig:
    """Mel-spectrogram parameters; f_max=None means Nyquist at extraction time."""

    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    n_mels: int = 80
    f_min: float = 0.0
    f_max: float | None = None
    log_floor: float = 1e-5

    def __post_init__(self):
        if self.n_mels < 1:
            raise ValueError("n_mels must be at least 1")
        if self.f_min < 0:
            raise ValueError("f_min must be non-negative")
        if self.f_max is not None and self.f_max <= self.f_min:
            raise ValueError("f_max must exceed f_min")
        if self.log_floor <= 0:
            raise ValueError("log_floor must be positive")


@functools.lru_cache(maxsize=64)
def _mel_weights(sample_rate: int, fft_size: int, n_mels: int, f_min: float, f_max: float) -> np.ndarray:
    if not (0 <= f_min < f_max <= sample_rate / 2):
        raise ValueError(
            f"mel band edges must satisfy 0 <= f_min < f_max <= {sample_rate / 2}, "
            f"got f_min={f_min} f_max={f_max}"
        )
    n_bins = fft_size // 2 + 1
    fft_freqs = np.linspace(0.0, sample_rate / 2.0, n_bins)
    mel_pts = np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2)
    hz_pts = mel_to_hz(mel_pts)

    lower = (fft_freqs[None, :] - hz_pts[:-2, None]) / np.maximum(np.diff(hz_pts)[:-1, None], 1e-12)
    upper = (hz_pts[2:, None] - fft_freqs[None, :]) / np.maximum(np.diff(hz_pts)[1:, None], 1e-12)
    weights = np.maximum(0.0, np.minimum(lower, upper))
    weights *= (2.0 / (hz_pts[2:] - hz_pts[:-2]))[:, None]
    weights.flags.writeable = False
    return weights


def mel_filterbank(sample_rate: int, cfg: MelConfig) -> np.ndarray:
    """(n_mels, n_bins) triangular filterbank for the config at this rate."""
    f_max = cfg.f_max if cfg.f_max is not None else sample_rate / 2.0
    return _mel_weights(int(sample_rate), cfg.spectral.fft_size, cfg.n_mels, float(cfg.f_min), float(f_max))


def mel_spectrogram(x: Waveform, cfg: MelConfig) -> np.ndarray:
    """Log-compressed mel magnitudes, shape (frames, n_mels)."""
    if len(x) == 0:
        raise ValueError("cannot take the mel spectrogram of an empty signal")
    fb = mel_filterbank(x.sample_rate, cfg)
    mag = np.abs(stft(x, cfg.spectral))
    energies = mag @ fb.T
    return np.log(np.maximum(energies, cfg.log_floor))


def default_mel(sample_rate: int) -> MelConfig:
    return MelConfig(spectral=default_spectral(sample_rate))
