"""Analysis front-end: F0 tracking, harmonic and noise estimation, round trips."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hnsynth.analysis import (
    AnalysisConfig,
    analyze,
    estimate_f0,
    estimate_harmonics,
    estimate_initial_phases,
    estimate_noise,
)
from hnsynth.spectral import MelConfig, SpectralConfig, mel_spectrogram, stft
from hnsynth.synth import harmonic_synthesize
from hnsynth.types import F0Contour, HarmonicAmplitudes, InitialPhases, Waveform

from conftest import constant_amps, constant_contour, harmonic_tone, sine

SR = 22050
SPECTRAL = SpectralConfig()  # 2048/512
ANA = AnalysisConfig(hop_size=SPECTRAL.hop_size)
ANA_REFINED = AnalysisConfig(hop_size=SPECTRAL.hop_size, refine_iters=2)


def rel_err(est, true):
    return abs(est - true) / true


# ---------------------------------------------------------------- F0

def test_f0_pure_sine_within_one_hz():
    f0 = estimate_f0(sine(220.0, SR, 1.0), ANA)
    assert f0.voiced.all()
    assert np.abs(f0.values - 220.0).max() < 1.0


def test_f0_silence_all_unvoiced():
    f0 = estimate_f0(Waveform(np.zeros(SR), SR), ANA)
    assert not f0.voiced.any()
    assert (f0.values == 0).all()


def test_f0_two_plateaus_short_transition():
    x = np.concatenate([sine(220.0, SR, 0.5).samples, sine(330.0, SR, 0.5).samples])
    f0 = estimate_f0(Waveform(x, SR), ANA)
    near_220 = np.abs(f0.values - 220.0) < 2.0
    near_330 = np.abs(f0.values - 330.0) < 2.0
    off_plateau = f0.frames - int(near_220.sum()) - int(near_330.sum())
    # ~22 frames per half-second plateau at this hop
    assert near_220.sum() >= 15 and near_330.sum() >= 15
    assert off_plateau < 5


def test_f0_hop_matches_config():
    f0 = estimate_f0(sine(220.0, SR, 0.5), ANA)
    assert f0.hop_size == ANA.hop_size
    assert f0.frames == int(np.ceil(0.5 * SR / ANA.hop_size))


def test_f0_too_short_input_rejected():
    with pytest.raises(ValueError):
        estimate_f0(Waveform(np.zeros(ANA.hop_size), SR), ANA)


def test_f0_values_confined_to_search_range():
    rng = np.random.default_rng(11)
    x = Waveform(rng.standard_normal(SR), SR)
    f0 = estimate_f0(x, ANA)
    voiced = f0.values[f0.voiced]
    if voiced.size:
        assert voiced.min() >= ANA.f0_min
        assert voiced.max() <= ANA.f0_max


def test_f0_shift_invariance_on_sustained_tone():
    # shifting by a fraction of a hop must not move frame estimates by 1 Hz
    x = sine(220.0, SR, 1.0)
    shifted = Waveform(np.roll(x.samples, 17), SR)
    a = estimate_f0(x, ANA)
    b = estimate_f0(shifted, ANA)
    assert np.abs(a.values - b.values).max() < 1.0


def test_f0_noisy_sines_mostly_within_two_hz():
    rng = np.random.default_rng(99)
    for freq in (220.0, 550.0):
        clean = sine(freq, SR, 1.0).samples
        noisy = clean + 0.1 * rng.standard_normal(clean.size)  # -20 dB noise
        f0 = estimate_f0(Waveform(noisy, SR), ANA)
        good = np.abs(f0.values[f0.voiced] - freq) < 2.0
        assert f0.voiced.mean() > 0.9
        assert good.mean() >= 0.95


# ------------------------------------------------------- harmonics

def test_harmonics_single_sine_recovered():
    frames = 40
    contour = constant_contour(220.0, frames, SPECTRAL.hop_size)
    x = harmonic_synthesize(contour, constant_amps([0.5], frames), SR)
    est = estimate_harmonics(x, contour, AnalysisConfig(hop_size=512, k_max=10), SPECTRAL)
    voiced_rows = est.values
    assert rel_err(np.median(voiced_rows[:, 0]), 0.5) < 0.05
    assert voiced_rows[:, 1:].max() < 0.02


def test_harmonics_silence_forced_voiced_is_zero():
    frames = 30
    contour = constant_contour(220.0, frames, SPECTRAL.hop_size)
    x = Waveform(np.zeros(frames * SPECTRAL.hop_size), SR)
    est = estimate_harmonics(x, contour, AnalysisConfig(hop_size=512, k_max=8), SPECTRAL)
    assert est.values.max() < 1e-3


def test_harmonics_two_component_tone_recovered():
    frames = 40
    contour = constant_contour(220.0, frames, SPECTRAL.hop_size)
    x = harmonic_synthesize(contour, constant_amps([0.5, 0.25], frames), SR)
    est = estimate_harmonics(x, contour, AnalysisConfig(hop_size=512, k_max=6), SPECTRAL)
    assert rel_err(np.median(est.values[:, 0]), 0.5) < 0.05
    assert rel_err(np.median(est.values[:, 1]), 0.25) < 0.05


def test_harmonics_zero_for_unvoiced_frames_and_nonnegative():
    values = np.concatenate([np.full(20, 220.0), np.zeros(15), np.full(20, 220.0)])
    contour = F0Contour.from_values(values, SPECTRAL.hop_size)
    amps = constant_amps([0.4, 0.2], 55)
    x = harmonic_synthesize(contour, amps, SR)
    est = estimate_harmonics(x, contour, AnalysisConfig(hop_size=512, k_max=6), SPECTRAL)
    assert (est.values >= 0).all()
    assert np.abs(est.values[~contour.voiced]).max() == 0.0


def test_harmonics_above_nyquist_left_at_zero():
    frames = 30
    contour = constant_contour(4000.0, frames, SPECTRAL.hop_size)
    x = harmonic_synthesize(contour, constant_amps([0.5, 0.3], frames), SR)
    est = estimate_harmonics(x, contour, AnalysisConfig(hop_size=512, k_max=5), SPECTRAL)
    # k >= 3 sits above the 11.025 kHz Nyquist: never measured
    assert est.values[:, 3:].max() == 0.0


def test_harmonics_hop_mismatch_rejected():
    contour = constant_contour(220.0, 10, 256)
    x = Waveform(np.zeros(10 * 256), SR)
    with pytest.raises(ValueError):
        estimate_harmonics(x, contour, AnalysisConfig(hop_size=256), SPECTRAL)


def test_refinement_tightens_wobbled_tone():
    x = harmonic_tone(220.0, SR, 2.0, [0.5, 0.3, 0.2, 0.1], wobble=0.25)
    f0 = estimate_f0(x, ANA)
    raw = estimate_harmonics(x, f0, ANA, SPECTRAL)
    ref = estimate_harmonics(x, f0, ANA_REFINED, SPECTRAL)

    def round_trip_mel(H):
        y = harmonic_synthesize(f0, H, SR)
        y = Waveform(y.samples[: len(x)], SR)
        cfg = MelConfig(spectral=SPECTRAL)
        return np.abs(mel_spectrogram(y, cfg) - mel_spectrogram(x, cfg)).mean()

    assert round_trip_mel(ref) <= round_trip_mel(raw) + 1e-6


# ------------------------------------------------------------ phases

def test_initial_phase_recovery_on_clean_tone():
    frames, hop = 50, SPECTRAL.hop_size
    contour = constant_contour(220.0, frames, hop)
    true_phases = np.array([0.5, -1.2, 2.0])
    x = harmonic_synthesize(contour, constant_amps([0.5, 0.3, 0.2], frames), SR, InitialPhases(true_phases))
    est = estimate_initial_phases(x, contour, 3)
    err = np.angle(np.exp(1j * (est.values - true_phases)))
    assert np.abs(err).max() < 0.05


# ------------------------------------------------------------- noise

def test_noise_exact_harmonic_leaves_nothing():
    frames = 40
    contour = constant_contour(220.0, frames, SPECTRAL.hop_size)
    x = harmonic_synthesize(contour, constant_amps([0.5, 0.25], frames), SR)
    n = estimate_noise(x, x, SPECTRAL)
    assert n.values.max() < 1e-6


def test_noise_zero_harmonic_returns_signal_spectrum(rng):
    x = Waveform(rng.standard_normal(8192) * 0.1, SR)
    silent = Waveform(np.zeros(8192), SR)
    n = estimate_noise(x, silent, SPECTRAL)
    assert np.array_equal(n.values, np.abs(stft(x, SPECTRAL)))


def test_noise_mixture_energy_within_20_percent():
    rng = np.random.default_rng(2024)
    clean = 0.3 * sine(220.0, SR, 2.0).samples
    noise = 0.15 * rng.standard_normal(clean.size)
    x = Waveform(clean + noise, SR)

    f0 = estimate_f0(x, ANA_REFINED)
    harm = estimate_harmonics(x, f0, ANA_REFINED, SPECTRAL)
    phi0 = estimate_initial_phases(x, f0, harm.k_max)
    rendered = harmonic_synthesize(f0, harm, SR, phi0)
    aligned = Waveform(rendered.samples[: len(x)], SR)
    est = estimate_noise(x, aligned, SPECTRAL)

    true_energy = (np.abs(stft(Waveform(noise, SR), SPECTRAL)) ** 2).sum()
    est_energy = (est.values**2).sum()
    assert 0.8 < est_energy / true_energy < 1.2


def test_noise_length_mismatch_rejected(rng):
    x = Waveform(rng.standard_normal(4096), SR)
    with pytest.raises(ValueError):
        estimate_noise(x, Waveform(np.zeros(4000), SR), SPECTRAL)


# ----------------------------------------------------------- analyze

def test_analyze_round_trip_mel_bound():
    x = harmonic_tone(220.0, SR, 2.0, [0.5, 0.3, 0.2, 0.1], wobble=0.2)
    f0, harm, noise = analyze(x, ANA_REFINED, SPECTRAL)
    y = harmonic_synthesize(f0, harm, SR)
    y = Waveform(y.samples[: len(x)], SR)
    cfg = MelConfig(spectral=SPECTRAL)
    l1 = np.abs(mel_spectrogram(y, cfg) - mel_spectrogram(x, cfg)).mean()
    assert l1 < 0.05


def test_analyze_silence():
    x = Waveform(np.zeros(SR), SR)
    f0, harm, noise = analyze(x, ANA, SPECTRAL)
    assert not f0.voiced.any()
    assert harm.values.max() == 0.0
    assert noise.values.max() < 1e-9


def test_analyze_f0_matches_estimate_f0_exactly():
    x = sine(220.0, SR, 1.0)
    f0, _, _ = analyze(x, ANA, SPECTRAL)
    direct = estimate_f0(x, ANA)
    assert np.array_equal(f0.values, direct.values)
    assert np.array_equal(f0.voiced, direct.voiced)


def test_analyze_hop_mismatch_rejected():
    with pytest.raises(ValueError):
        analyze(sine(220.0, SR, 1.0), AnalysisConfig(hop_size=256), SPECTRAL)


@settings(max_examples=10, deadline=None)
@given(
    f0=st.floats(min_value=100.0, max_value=800.0),
    scale=st.floats(min_value=0.3, max_value=0.9),
    wobble=st.floats(min_value=0.0, max_value=0.15),
)
def test_round_trip_property_smooth_harmonic_tones(f0, scale, wobble):
    amps = scale * np.array([0.55, 0.3, 0.18, 0.1])
    x = harmonic_tone(f0, SR, 2.0, amps, wobble=wobble)
    contour, harm, _ = analyze(x, ANA_REFINED, SPECTRAL)

    y = harmonic_synthesize(contour, harm, SR)
    y = Waveform(y.samples[: len(x)], SR)
    cfg = MelConfig(spectral=SPECTRAL)
    l1 = np.abs(mel_spectrogram(y, cfg) - mel_spectrogram(x, cfg)).mean()
    assert l1 < 0.1

    # amplitude recovery for harmonics that matter, compared mid-signal where
    # the wobble envelope is back at its base value
    mid = harm.frames // 2
    window = slice(mid - 2, mid + 3)
    for k, a in enumerate(amps):
        if a >= 0.05:
            got = np.median(harm.values[window, k])
            assert rel_err(got, a) < 0.10


def test_config_validation():
    with pytest.raises(ValueError):
        AnalysisConfig(f0_min=0.0)
    with pytest.raises(ValueError):
        AnalysisConfig(f0_min=500.0, f0_max=100.0)
    with pytest.raises(ValueError):
        AnalysisConfig(refine_iters=-1)
    with pytest.raises(ValueError):
        AnalysisConfig(harmonic_floor=1.5)
    with pytest.raises(ValueError):
        AnalysisConfig(median_width=4)
