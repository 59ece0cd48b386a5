"""Deterministic synthesis of periodic and aperiodic waveform components.

The harmonic bank renders y(n) = sum_k H_k(n) sin(phi_k(n)) where phi_k is the
running sum of the per-sample harmonic frequency (inclusive of sample n, i.e.
phi(n) covers samples 0..n) and f_k(n) = k * f0(n). The noise branch inverts a
magnitude spectrogram with uniformly random phase. Both are pure functions; the
noise branch is pure given its seed.
"""

from __future__ import annotations

import numpy as np

from .spectral import SpectralConfig, istft
from .types import F0Contour, HarmonicAmplitudes, InitialPhases, NoiseMagnitudeSpectrum, Waveform


def interpolate_to_samples(frame_values, hop_size: int, out_len: int) -> np.ndarray:
    """Piecewise-linear interpolation of per-frame values to sample rate.

    Frame m anchors at sample m*hop_size + hop_size//2; the ends extend
    the edge frame values as constants.
    """
    values = np.ascontiguousarray(frame_values, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("frame_values must be a non-empty 1-D sequence")
    if hop_size <= 0:
        raise ValueError("hop_size must be positive")
    if out_len < 0 or out_len > values.size * hop_size:
        raise ValueError(
            f"out_len must lie in [0, frames*hop_size], got {out_len} for "
            f"{values.size} frames of hop {hop_size}"
        )
    anchors = np.arange(values.size, dtype=np.float64) * hop_size + hop_size // 2
    return np.interp(np.arange(out_len, dtype=np.float64), anchors, values)


def cumulative_phase(f, sample_rate: int, phi0: float = 0.0) -> np.ndarray:
    """Unwrapped phase 2*pi * cumsum(f)/Sr + phi0, accumulated in extended precision.

    The sum is inclusive: the phase at sample n covers frequency samples 0..n.
    """
    f = np.ascontiguousarray(f, dtype=np.float64)
    if f.size and not np.isfinite(f).all():
        raise ValueError("frequencies must be finite")
    if f.size and f.min() < 0:
        raise ValueError("frequencies must be non-negative")
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    cycles = np.cumsum(f.astype(np.longdouble)) / sample_rate
    phase = 2 * np.pi * cycles + np.longdouble(phi0)
    return phase.astype(np.float64)


def _base_phase(f0_samples: np.ndarray, sample_rate: int) -> np.ndarray:
    # Same accumulation as cumulative_phase, kept in extended precision so the
    # per-harmonic scaling k*psi does not inherit float64 cumsum drift.
    cycles = np.cumsum(f0_samples.astype(np.longdouble)) / sample_rate
    return np.asarray(2 * np.pi * cycles, dtype=np.float64)


def harmonic_synthesize(
    f0: F0Contour,
    amplitudes: HarmonicAmplitudes,
    sample_rate: int,
    phi0: InitialPhases | None = None,
) -> Waveform:
    """Render the sinusoidal bank driven by frame-level f0 and amplitudes.

    Output length is frames * hop_size. Any (sample, harmonic) pair whose
    frequency k*f0(n) reaches Nyquist contributes exactly zero, as do all
    harmonics wherever the interpolated f0 is zero (unvoiced regions).
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be positive")
    if amplitudes.frames != f0.frames:
        raise ValueError(
            f"frame count mismatch: f0 has {f0.frames} frames, amplitudes {amplitudes.frames}"
        )
    k_max = amplitudes.k_max
    if phi0 is None:
        phi0 = InitialPhases.zeros(k_max)
    if len(phi0) != k_max:
        raise ValueError(f"need {k_max} initial phases, got {len(phi0)}")
    nyquist = sample_rate / 2.0
    if f0.values.size and f0.values.max() >= nyquist:
        raise ValueError("f0 values must stay below Nyquist for this sample rate")

    n = f0.frames * f0.hop_size
    f0_samples = interpolate_to_samples(f0.values, f0.hop_size, n)
    psi = _base_phase(f0_samples, sample_rate)
    voiced = f0_samples > 0

    out = np.zeros(n)
    for k in range(1, k_max + 1):
        gate = voiced & (k * f0_samples < nyquist)
        if not gate.any():
            break  # harmonic frequency only grows with k
        amp = interpolate_to_samples(amplitudes.values[:, k - 1], f0.hop_size, n)
        amp *= gate
        out += amp * np.sin(k * psi + phi0.values[k - 1])
    return Waveform(out, sample_rate)


def noise_synthesize(
    noise: NoiseMagnitudeSpectrum,
    spectral: SpectralConfig,
    seed: int,
    sample_rate: int,
    out_len: int | None = None,
) -> Waveform:
    """Inverse-STFT of the magnitude matrix under i.i.d. uniform random phase.

    The phase matrix is drawn from a generator seeded with `seed`, so identical
    (noise, spectral, seed) inputs produce bit-identical output. Default length
    is frames * hop_size, matching the harmonic branch for the same framing.
    """
    if noise.bins != spectral.n_bins:
        raise ValueError(
            f"noise spectrum has {noise.bins} bins but config expects {spectral.n_bins}"
        )
    if out_len is None:
        out_len = noise.frames * spectral.hop_size
    rng = np.random.default_rng(seed)
    phases = rng.uniform(-np.pi, np.pi, size=noise.values.shape)
    spec = noise.values * np.exp(1j * phases)
    return Waveform(istft(spec, spectral, out_len), sample_rate)


def dsp_combine(harmonic: Waveform, noise: Waveform) -> Waveform:
    """Elementwise sum of the periodic and aperiodic components."""
    if len(harmonic) != len(noise):
        raise ValueError(f"length mismatch: {len(harmonic)} vs {len(noise)}")
    if harmonic.sample_rate != noise.sample_rate:
        raise ValueError(
            f"sample rate mismatch: {harmonic.sample_rate} vs {noise.sample_rate}"
        )
    return Waveform(harmonic.samples + noise.samples, harmonic.sample_rate)
