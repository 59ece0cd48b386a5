"""Shared signal builders for the test suite.

All generators are deterministic given their arguments; randomized tests
seed their own Generator so failures reproduce.
"""

import numpy as np
import pytest

from hnsynth.types import F0Contour, HarmonicAmplitudes, Waveform


def sine(freq_hz, sr, seconds, amp=1.0, phase=0.0):
    t = np.arange(int(round(seconds * sr))) / sr
    return Waveform(amp * np.sin(2 * np.pi * freq_hz * t + phase), sr)


def harmonic_tone(f0_hz, sr, seconds, amps, wobble=0.0, wobble_hz=1.5):
    """Sum of harmonics k*f0 with amplitudes amps, optionally AM-wobbled.

    The wobble keeps the envelope smooth but non-constant, so analysis has to
    track a moving target instead of a single global gain.
    """
    t = np.arange(int(round(seconds * sr))) / sr
    env = 1.0 + wobble * np.sin(2 * np.pi * wobble_hz * t)
    x = np.zeros_like(t)
    for k, a in enumerate(amps, start=1):
        x += a * env * np.sin(2 * np.pi * k * f0_hz * t)
    return Waveform(x, sr)


def constant_contour(f0_hz, frames, hop):
    return F0Contour.from_values(np.full(frames, float(f0_hz)), hop)


def constant_amps(amps, frames):
    return HarmonicAmplitudes(np.tile(np.asarray(amps, dtype=float), (frames, 1)))


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
