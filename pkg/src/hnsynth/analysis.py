"""Feature extraction: F0 tracking, harmonic amplitudes, noise magnitudes.

The tracker is a normalized-autocorrelation (NCCF) pitch detector with
parabolic peak refinement and a median filter over voiced runs. Harmonic
amplitudes are read off the magnitude STFT by local peak interpolation and
window-gain normalization, so a unit-amplitude sinusoid measures as ~1.
The noise spectrum is the magnitude STFT of the residual after subtracting a
phase-aligned harmonic reconstruction.

All frame-level outputs share the hop and the frame anchor (m*hop + hop//2)
used by the spectral module, so contours, amplitude matrices, and STFTs of the
same signal line up frame for frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralConfig, stft
from .synth import harmonic_synthesize, interpolate_to_samples
from .types import F0Contour, HarmonicAmplitudes, InitialPhases, NoiseMagnitudeSpectrum, Waveform

_TINY = 1e-12


@dataclass(frozen=True)
class AnalysisConfig:
    """Parameters of the analysis front-end.

    f0_min/f0_max bound the pitch search; hop_size must match the spectral
    hop when the outputs feed harmonic estimation. voicing_threshold is the
    minimum normalized-autocorrelation peak for a frame to count as voiced,
    and silence_rms is the frame RMS below which frames are unvoiced outright.
    """

    f0_min: float = 70.0
    f0_max: float = 800.0
    hop_size: int = 512
    k_max: int = 100
    peak_halfwidth_bins: int = 2
    refine_iters: int = 0
    harmonic_floor: float = 0.05
    voicing_threshold: float = 0.3
    silence_rms: float = 1e-5
    median_width: int = 5

    def __post_init__(self):
        if not (0 < self.f0_min < self.f0_max):
            raise ValueError(f"need 0 < f0_min < f0_max, got {self.f0_min}, {self.f0_max}")
        if self.hop_size <= 0:
            raise ValueError("hop_size must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.peak_halfwidth_bins < 1:
            raise ValueError("peak_halfwidth_bins must be at least 1")
        if self.refine_iters < 0:
            raise ValueError("refine_iters must be non-negative")
        if not (0 <= self.harmonic_floor < 1):
            raise ValueError("harmonic_floor must lie in [0, 1)")
        if self.median_width < 1 or self.median_width % 2 == 0:
            raise ValueError("median_width must be a positive odd count")


def _frame_centers(n_frames: int, hop: int) -> np.ndarray:
    return np.arange(n_frames) * hop + hop // 2


def _nccf_frames(x: np.ndarray, centers: np.ndarray, wlen: int, max_lag: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized cross-correlation per frame for lags 0..max_lag.

    Each frame correlates a wlen-sample base segment, centered on the frame
    anchor, against itself shifted by the candidate lag. Returns (nccf,
    base_energy, lag_energy) with nccf shape (frames, max_lag+1).
    """
    span = wlen + max_lag
    half = span // 2
    xp = np.pad(x, (half, span))
    # original sample c - half maps to padded index c, so frame m's segment
    # starts at padded index centers[m]; centers step by hop, so this is a view
    hop = centers[1] - centers[0] if len(centers) > 1 else 1
    segs = np.lib.stride_tricks.sliding_window_view(xp, span)[centers[0] :: hop][: len(centers)]

    n_fft = 1 << (span - 1).bit_length()
    base = segs[:, :wlen]
    spec_base = np.fft.rfft(base, n=n_fft, axis=1)
    spec_seg = np.fft.rfft(segs, n=n_fft, axis=1)
    corr = np.fft.irfft(np.conj(spec_base) * spec_seg, n=n_fft, axis=1)[:, : max_lag + 1]

    sq = np.concatenate([np.zeros((len(centers), 1)), np.cumsum(segs * segs, axis=1)], axis=1)
    lag_energy = sq[:, wlen : wlen + max_lag + 1] - sq[:, : max_lag + 1]
    base_energy = lag_energy[:, 0]
    denom = np.sqrt(np.maximum(base_energy[:, None] * lag_energy, _TINY))
    return corr / denom, base_energy, lag_energy


def _lobe_vertex(seg: np.ndarray, i: int) -> float:
    """Sub-lag peak position from a least-squares parabola over the lobe top.

    Fits every contiguous lag whose correlation stays above 90% of the local
    peak, so a broad noisy peak (pure tone in noise) is averaged over many
    lags while a sharp multi-harmonic peak keeps a 3-point footprint. The
    vertex is clamped to the fitted range.
    """
    cut = 0.9 * seg[i]
    lo = i
    while lo > 0 and seg[lo - 1] >= cut:
        lo -= 1
    hi = i
    while hi < len(seg) - 1 and seg[hi + 1] >= cut:
        hi += 1
    lo = min(lo, i - 1)
    hi = max(hi, i + 1)
    if lo < 0 or hi > len(seg) - 1:
        return float(i)
    u = np.arange(lo, hi + 1, dtype=float) - i
    a, b, _ = np.polyfit(u, seg[lo : hi + 1], 2)
    if a >= -_TINY:
        return float(i)
    vertex = -b / (2.0 * a)
    return i + float(np.clip(vertex, u[0], u[-1]))


def _pick_peak(r: np.ndarray, min_lag: int, threshold: float) -> tuple[float, float]:
    """Subharmonic-aware correlation peak; returns (lag, value).

    Starts from the global maximum over the admissible lags, then prefers the
    smallest integer submultiple of that lag whose correlation is nearly as
    high: a periodic signal repeats at every multiple of its true period, so
    the argmax can land an octave (or more) low, but arbitrary shorter lags
    never qualify. Returns (nan, value) when the best peak misses threshold.
    """
    seg = r[min_lag:]
    if len(seg) < 3:
        return math.nan, 0.0
    best_idx = int(np.argmax(seg))
    best = float(seg[best_idx])
    if best < threshold:
        return math.nan, best
    lag0 = min_lag + best_idx
    chosen = best_idx
    for div in range(int(lag0 // min_lag), 1, -1):
        approx = lag0 / div - min_lag
        lo = max(0, int(round(approx)) - 2)
        hi = min(len(seg), int(round(approx)) + 3)
        if hi <= lo:
            continue
        local = lo + int(np.argmax(seg[lo:hi]))
        if seg[local] >= 0.9 * best:
            chosen = local
            break
    i = int(np.clip(chosen, 1, len(seg) - 2))
    return min_lag + _lobe_vertex(seg, i), float(seg[i])


def _smooth_voiced(
    values: np.ndarray, voiced: np.ndarray, width: int, reducer=np.median
) -> np.ndarray:
    """Apply reducer over the voiced entries of each centered window."""
    half = width // 2
    out = values.copy()
    idx = np.flatnonzero(voiced)
    for i in idx:
        lo, hi = max(0, i - half), min(len(values), i + half + 1)
        neighborhood = values[lo:hi][voiced[lo:hi]]
        out[i] = reducer(neighborhood)
    return out


def estimate_f0(x: Waveform, cfg: AnalysisConfig) -> F0Contour:
    """Track the fundamental frequency; unvoiced frames get f0 = 0."""
    sr = x.sample_rate
    if cfg.f0_max >= sr / 2:
        raise ValueError(f"f0_max={cfg.f0_max} must stay below Nyquist ({sr / 2})")
    hop = cfg.hop_size
    n_frames = math.ceil(len(x) / hop)
    if n_frames < 2:
        raise ValueError(f"signal too short: need at least 2 frames of hop {hop}")

    max_lag = int(math.ceil(sr / cfg.f0_min))
    min_lag = max(2, int(math.floor(sr / cfg.f0_max)))
    # Correlating over two full periods of the lowest trackable pitch keeps
    # the refined lag stable under heavy additive noise.
    wlen = 2 * max_lag
    centers = _frame_centers(n_frames, hop)
    nccf, base_energy, _ = _nccf_frames(x.samples, centers, wlen, max_lag)

    energy_floor = wlen * cfg.silence_rms**2
    values = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for m in range(n_frames):
        if base_energy[m] < energy_floor:
            continue
        lag, clarity = _pick_peak(nccf[m], min_lag, cfg.voicing_threshold)
        if math.isnan(lag) or clarity < cfg.voicing_threshold:
            continue
        f = sr / lag
        if not (cfg.f0_min <= f <= cfg.f0_max):
            f = float(np.clip(f, cfg.f0_min, cfg.f0_max))
        values[m] = f
        voiced[m] = True

    # Median first to reject isolated octave errors, then a short mean to
    # cut frame-to-frame jitter that would read back as FM in resynthesis.
    values = _smooth_voiced(values, voiced, cfg.median_width, np.median)
    values = _smooth_voiced(values, voiced, cfg.median_width, np.mean)
    values = _phase_refine(x.samples, values, voiced, sr, hop)
    values[~voiced] = 0.0
    return F0Contour(hop_size=hop, values=values, voiced=voiced)


def _phase_refine(
    x: np.ndarray,
    values: np.ndarray,
    voiced: np.ndarray,
    sr: int,
    hop: int,
    max_correction: float = 3.0,
) -> np.ndarray:
    """Sharpen voiced estimates from the phase drift of the demodulated fundamental.

    Demodulating x at the coarse estimate f and summing two adjacent 2*hop
    windows leaves a residual phase step of 2*pi*(f_true - f)*(2*hop)/sr
    between them, giving a correction far below the lag-domain resolution.
    Residual per-frame jitter otherwise random-walks into audible phase drift
    when the contour is integrated back into a sinusoid.
    """
    values = values.copy()
    half = 2 * hop
    # Hann-weighting each half suppresses the -2f image and neighboring
    # harmonics that would otherwise bias the phase step.
    taper = np.hanning(half + 1)[:-1]
    for m in np.flatnonzero(voiced):
        center = m * hop + hop // 2
        lo, hi = center - half, center + half
        if lo < 0 or hi > len(x):
            continue  # edge frames keep the lag-domain estimate
        f_hat = values[m]
        t = np.arange(lo, hi) / sr
        demod = x[lo:hi] * np.exp(-2j * np.pi * f_hat * t)
        c1 = (taper * demod[:half]).sum()
        c2 = (taper * demod[half:]).sum()
        if min(abs(c1), abs(c2)) < _TINY:
            continue
        step = float(np.angle(c2 * np.conj(c1)))
        correction = step * sr / (2 * np.pi * half)
        values[m] = f_hat + float(np.clip(correction, -max_correction, max_correction))
    return values


def load_f0(path) -> F0Contour:
    """Read a frame-per-line F0 text file (see the features module for the format)."""
    from .features import load_f0 as _load

    return _load(path)


def _peak_measure(db: np.ndarray, bins: np.ndarray, halfwidth: int) -> np.ndarray:
    """Parabolically interpolated peak magnitude (linear units) near each bin.

    db is one frame of 20*log10 magnitudes; bins are the integer starting
    guesses. Searches +-halfwidth bins for the local maximum first.
    """
    n_bins = db.shape[0]
    offs = np.arange(-halfwidth, halfwidth + 1)
    window = np.clip(bins[:, None] + offs[None, :], 1, n_bins - 2)
    local = db[window]
    peak = window[np.arange(len(bins)), np.argmax(local, axis=1)]
    alpha, beta, gamma = db[peak - 1], db[peak], db[peak + 1]
    denom = alpha - 2 * beta + gamma
    delta = np.where(denom < -_TINY, 0.5 * (alpha - gamma) / np.where(denom < -_TINY, denom, -1.0), 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    peak_db = beta - 0.25 * (alpha - gamma) * delta
    return 10.0 ** (peak_db / 20.0)


def estimate_harmonics(
    x: Waveform,
    f0: F0Contour,
    cfg: AnalysisConfig,
    spectral: SpectralConfig,
) -> HarmonicAmplitudes:
    """Per-frame harmonic amplitudes sampled from the magnitude STFT.

    Unvoiced frames and harmonics at or above Nyquist get amplitude 0. With
    refine_iters > 0, the estimate is multiplicatively corrected against a
    resynthesized harmonic part.
    """
    if f0.hop_size != spectral.hop_size:
        raise ValueError(
            f"hop mismatch: contour hop {f0.hop_size} vs spectral hop {spectral.hop_size}"
        )
    mag = np.abs(stft(x, spectral))
    if mag.shape[0] != f0.frames:
        raise ValueError(
            f"frame count mismatch: contour has {f0.frames}, STFT has {mag.shape[0]}"
        )
    target = _harmonics_from_magnitude(mag, f0, cfg, spectral, x.sample_rate, len(x))
    values = target

    for _ in range(cfg.refine_iters):
        resynth = harmonic_synthesize(f0, HarmonicAmplitudes(values), x.sample_rate)
        resynth_wave = Waveform(resynth.samples[: len(x)], x.sample_rate)
        resynth_mag = np.abs(stft(resynth_wave, spectral))
        measured = _harmonics_from_magnitude(resynth_mag, f0, cfg, spectral, x.sample_rate, len(x))
        ratio = np.where(measured > _TINY, target / np.maximum(measured, _TINY), 1.0)
        values = values * np.clip(ratio, 0.25, 4.0)

    # Readings far below the frame's strongest harmonic are indistinguishable
    # from noise or window-leakage skirts; drop them so the residual noise
    # model carries that energy instead of phantom sinusoids.
    if cfg.harmonic_floor > 0:
        floor = cfg.harmonic_floor * values.max(axis=1, keepdims=True)
        values[values < floor] = 0.0
    return HarmonicAmplitudes(values)


def _frame_gains(spectral: SpectralConfig, n_frames: int, n_samples: int) -> np.ndarray:
    """Coherent gain per frame: half the window mass overlapping the signal.

    A sinusoid of amplitude A leaves a spectral peak of A * sum(w) / 2, so
    dividing a measured peak by this gain recovers A. Frames whose window
    hangs past the signal edges see less of it; using only the visible mass
    keeps edge-frame estimates unbiased.
    """
    w = spectral.window_array()
    csum = np.concatenate([[0.0], np.cumsum(w)])
    starts = np.arange(n_frames) * spectral.hop_size - spectral.pad_left
    lo = np.clip(-starts, 0, spectral.fft_size)
    hi = np.clip(n_samples - starts, 0, spectral.fft_size)
    return np.maximum(csum[hi] - csum[lo], _TINY) / 2.0


def _harmonics_from_magnitude(
    mag: np.ndarray,
    f0: F0Contour,
    cfg: AnalysisConfig,
    spectral: SpectralConfig,
    sample_rate: int,
    n_samples: int,
) -> np.ndarray:
    nyquist = sample_rate / 2.0
    bin_hz = sample_rate / spectral.fft_size
    gains = _frame_gains(spectral, mag.shape[0], n_samples)
    db = 20.0 * np.log10(mag + _TINY)
    values = np.zeros((f0.frames, cfg.k_max))
    ks = np.arange(1, cfg.k_max + 1)
    for m in np.flatnonzero(f0.voiced):
        freqs = ks * f0.values[m]
        keep = freqs < nyquist
        if not keep.any():
            continue
        bins = np.rint(freqs[keep] / bin_hz).astype(int)
        values[m, keep] = _peak_measure(db[m], bins, cfg.peak_halfwidth_bins) / gains[m]
    return values


def estimate_initial_phases(x: Waveform, f0: F0Contour, k_max: int) -> InitialPhases:
    """Starting phase per harmonic that best aligns a resynthesis with x.

    Demodulates x against the accumulated fundamental phase, so the estimate
    follows any f0 trajectory, not just constant pitch. Harmonics without
    voiced in-band frames get phase 0.
    """
    sr = x.sample_rate
    nyquist = sr / 2.0
    n = min(len(x), f0.frames * f0.hop_size)
    f0_samples = interpolate_to_samples(f0.values, f0.hop_size, n)
    cycles = np.cumsum(f0_samples.astype(np.longdouble)) / sr
    psi = np.asarray(2 * np.pi * cycles, dtype=np.float64)
    rot = np.exp(-1j * psi)

    phases = np.zeros(k_max)
    demod = x.samples[:n].astype(complex)
    for k in range(1, k_max + 1):
        demod *= rot
        active = (f0_samples > 0) & (k * f0_samples < nyquist)
        if not active.any():
            break
        # x ~ H sin(k psi + phi) = H cos(k psi + phi - pi/2); averaging the
        # demodulated signal over active samples leaves ~ (H/2) e^{i(phi - pi/2)}
        acc = demod[active].sum()
        if acc != 0:
            phases[k - 1] = np.angle(acc) + np.pi / 2
    return InitialPhases.wrapped(phases)


def estimate_noise(x: Waveform, harmonic: Waveform, spectral: SpectralConfig) -> NoiseMagnitudeSpectrum:
    """Magnitude STFT of the residual x - harmonic."""
    if len(x) != len(harmonic):
        raise ValueError(f"length mismatch: {len(x)} vs {len(harmonic)}")
    if x.sample_rate != harmonic.sample_rate:
        raise ValueError(
            f"sample rate mismatch: {x.sample_rate} vs {harmonic.sample_rate}"
        )
    residual = Waveform(x.samples - harmonic.samples, x.sample_rate)
    return NoiseMagnitudeSpectrum(np.abs(stft(residual, spectral)))


def analyze(
    x: Waveform,
    cfg: AnalysisConfig,
    spectral: SpectralConfig,
) -> tuple[F0Contour, HarmonicAmplitudes, NoiseMagnitudeSpectrum]:
    """Full feature extraction: F0 contour, harmonic amplitudes, noise spectrum.

    The residual driving the noise spectrum subtracts a harmonic reconstruction
    whose initial phases were fitted to x; the returned features themselves stay
    amplitude-only.
    """
    if cfg.hop_size != spectral.hop_size:
        raise ValueError(
            f"hop mismatch: analysis hop {cfg.hop_size} vs spectral hop {spectral.hop_size}"
        )
    f0 = estimate_f0(x, cfg)
    harmonics = estimate_harmonics(x, f0, cfg, spectral)
    phi0 = estimate_initial_phases(x, f0, harmonics.k_max)
    rendered = harmonic_synthesize(f0, harmonics, x.sample_rate, phi0)
    aligned = Waveform(rendered.samples[: len(x)], x.sample_rate)
    noise = estimate_noise(x, aligned, spectral)
    return f0, harmonics, noise
