"""On-disk feature formats: binary analysis bundles and text F0 contours.

Bundle container layout (all integers little-endian):

    bytes 0..3    magic "HNSF"
    bytes 4..7    uint32 header length in bytes
    header        UTF-8 JSON: version, sample_rate, shapes, and the configs
    payload       raw float32 matrices in C order: f0 (frames,),
                  harmonics (frames, k_max), noise (frames, n_bins)

The JSON header keeps the file greppable while the payload stays compact.
Values are stored as float32, so a bundle whose arrays are exactly
representable in float32 round trips losslessly.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass

import numpy as np

from .analysis import AnalysisConfig
from .errors import FormatError
from .ioutil import atomic_write
from .spectral import SpectralConfig
from .synth import dsp_combine, harmonic_synthesize, noise_synthesize
from .types import F0Contour, HarmonicAmplitudes, NoiseMagnitudeSpectrum, Waveform

MAGIC = b"HNSF"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class FeatureBundle:
    """Everything analysis extracts and synthesis needs, with its configs."""

    f0: F0Contour
    harmonics: HarmonicAmplitudes
    noise: NoiseMagnitudeSpectrum
    sample_rate: int
    spectral: SpectralConfig
    analysis: AnalysisConfig

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        frames = self.f0.frames
        if self.harmonics.frames != frames or self.noise.frames != frames:
            raise ValueError(
                "frame count mismatch: "
                f"f0 {frames}, harmonics {self.harmonics.frames}, noise {self.noise.frames}"
            )
        if self.f0.hop_size != self.spectral.hop_size:
            raise ValueError(
                f"hop mismatch: f0 {self.f0.hop_size} vs spectral {self.spectral.hop_size}"
            )
        if self.analysis.hop_size != self.spectral.hop_size:
            raise ValueError(
                f"hop mismatch: analysis {self.analysis.hop_size} "
                f"vs spectral {self.spectral.hop_size}"
            )
        if self.noise.bins != self.spectral.n_bins:
            raise ValueError(
                f"noise spectrum has {self.noise.bins} bins, config expects {self.spectral.n_bins}"
            )

    @property
    def frames(self) -> int:
        return self.f0.frames

    @property
    def hop_size(self) -> int:
        return self.spectral.hop_size


def render_bundle(bundle: FeatureBundle, seed: int = 0) -> Waveform:
    """Synthesize the harmonic and noise branches of a bundle and sum them."""
    harmonic = harmonic_synthesize(bundle.f0, bundle.harmonics, bundle.sample_rate)
    noise = noise_synthesize(
        bundle.noise, bundle.spectral, seed, bundle.sample_rate, out_len=len(harmonic)
    )
    return dsp_combine(harmonic, noise)


def _payload(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def save_features(bundle: FeatureBundle, path) -> None:
    """Write a bundle in the container format; empty bundles are rejected."""
    if bundle.frames == 0:
        raise ValueError("refusing to save a bundle with zero frames")
    header = {
        "version": FORMAT_VERSION,
        "sample_rate": bundle.sample_rate,
        "frames": bundle.frames,
        "k_max": bundle.harmonics.k_max,
        "n_bins": bundle.noise.bins,
        "spectral": dataclasses.asdict(bundle.spectral),
        "analysis": dataclasses.asdict(bundle.analysis),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with atomic_write(path) as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(_payload(bundle.f0.values))
        fh.write(_payload(bundle.harmonics.values))
        fh.write(_payload(bundle.noise.values))


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FormatError(f"truncated feature file while reading {what}")
    return data


def load_features(path) -> FeatureBundle:
    """Read a container written by save_features."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise FormatError(f"{path}: not a feature file (bad magic)")
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        try:
            header = json.loads(_read_exact(fh, header_len, "header"))
        except ValueError as exc:
            raise FormatError(f"{path}: malformed JSON header: {exc}") from exc
        version = header.get("version")
        if version != FORMAT_VERSION:
            raise FormatError(
                f"{path}: unsupported feature file version {version!r}, "
                f"this reader handles {FORMAT_VERSION}"
            )
        try:
            frames = int(header["frames"])
            k_max = int(header["k_max"])
            n_bins = int(header["n_bins"])
            sample_rate = int(header["sample_rate"])
            spectral = SpectralConfig(**header["spectral"])
            analysis = AnalysisConfig(**header["analysis"])
        except (KeyError, TypeError) as exc:
            raise FormatError(f"{path}: incomplete header: {exc}") from exc

        def matrix(shape, what):
            n = int(np.prod(shape))
            raw = _read_exact(fh, 4 * n, what)
            return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)

        f0_values = matrix((frames,), "f0")
        harmonics = matrix((frames, k_max), "harmonics")
        noise = matrix((frames, n_bins), "noise spectrum")

    return FeatureBundle(
        f0=F0Contour.from_values(f0_values, spectral.hop_size),
        harmonics=HarmonicAmplitudes(harmonics),
        noise=NoiseMagnitudeSpectrum(noise),
        sample_rate=sample_rate,
        spectral=spectral,
        analysis=analysis,
    )


def save_f0(f0: F0Contour, sample_rate: int, path) -> None:
    """Write a contour in the text interchange format (one Hz value per line)."""
    lines = [f"# hop={f0.hop_size} sr={int(sample_rate)}\n"]
    # 17 significant digits round trips any float64 exactly
    lines += [f"{v:.17g}\n" for v in f0.values]
    with atomic_write(path, "w") as fh:
        fh.writelines(lines)


def load_f0(path) -> tuple[F0Contour, int]:
    """Read the text F0 format; returns the contour and its sample rate.

    Line 1 must be `# hop=<samples> sr=<hz>`; each further line is one frame's
    F0 in Hz, with 0 marking unvoiced frames.
    """
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
        fields = first.split()
        if (
            len(fields) != 3
            or fields[0] != "#"
            or not fields[1].startswith("hop=")
            or not fields[2].startswith("sr=")
        ):
            raise FormatError("expected header '# hop=<samples> sr=<hz>'", line=1)
        try:
            hop = int(fields[1][4:])
            sample_rate = int(fields[2][3:])
        except ValueError as exc:
            raise FormatError(f"bad header numbers: {exc}", line=1) from exc
        values = []
        for lineno, text in enumerate(fh, start=2):
            text = text.strip()
            if not text:
                continue
            try:
                value = float(text)
            except ValueError as exc:
                raise FormatError(f"bad F0 value {text!r}", line=lineno) from exc
            if not np.isfinite(value) or value < 0:
                raise FormatError(f"F0 must be finite and >= 0, got {value}", line=lineno)
            values.append(value)
    return F0Contour.from_values(np.asarray(values), hop), sample_rate
