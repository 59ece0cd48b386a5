"""Command-line surface: analyze, synth, resynth, and metrics subcommands.

Exit codes: 0 success, 2 usage, 3 I/O failure, 4 malformed file,
5 invariant violation (bad config values, mismatched inputs). Every failure
prints a one-line diagnostic to stderr; outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .analysis import analyze, estimate_f0
from .config import build_tool_config, describe_schema, parse_config_file
from .errors import FormatError
from .features import FeatureBundle, load_features, render_bundle, save_features
from .ioutil import atomic_write
from .losses import dsp_loss, f0_rmse, mel_l1
from .spectral import SpectralConfig, multi_resolution_spectrograms
from .types import Waveform
from .wavio import WAV_FORMATS, read_wav, write_wav


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hnsynth",
        description="Harmonic-plus-noise analysis and resynthesis toolkit.",
        epilog="Config file keys (key = value, one per line):\n" + describe_schema(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="FILE", help="key=value config file")

    p = sub.add_parser("analyze", help="extract features from a WAV into a bundle")
    p.add_argument("input", help="input WAV path")
    p.add_argument("-o", "--output", required=True, help="output feature bundle path")
    common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("synth", help="render a feature bundle back to audio")
    p.add_argument("input", help="input feature bundle path")
    p.add_argument("-o", "--output", required=True, help="output WAV path")
    p.add_argument("--seed", type=int, default=None, help="noise-phase seed (default 0)")
    p.add_argument("--format", choices=WAV_FORMATS, default="float32", help="output sample format")
    common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("resynth", help="analyze a WAV and resynthesize it in one step")
    p.add_argument("input", help="input WAV path")
    p.add_argument("-o", "--output", required=True, help="output WAV path")
    p.add_argument("--seed", type=int, default=None, help="noise-phase seed (default 0)")
    p.add_argument("--format", choices=WAV_FORMATS, default="float32", help="output sample format")
    p.add_argument("--report", metavar="FILE", help="also write the metrics JSON here")
    common(p)
    p.set_defaults(func=_cmd_resynth)

    p = sub.add_parser("metrics", help="print objective metrics between two WAVs")
    p.add_argument("a", help="first WAV path")
    p.add_argument("b", help="second WAV path")
    common(p)
    p.set_defaults(func=_cmd_metrics)

    return parser


def _overrides(args) -> dict:
    return parse_config_file(args.config) if args.config else {}


def _seed(args, overrides: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(overrides.get("seed", 0))


def _emit_report(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if path:
        with atomic_write(path, "w") as fh:
            fh.write(text + "\n")


def _mrs_l1(a: Waveform, b: Waveform, fft_sizes) -> float:
    cfgs = [SpectralConfig(fft_size=n, hop_size=n // 4, win_size=n) for n in fft_sizes]
    mags_a = multi_resolution_spectrograms(a, cfgs)
    mags_b = multi_resolution_spectrograms(b, cfgs)
    return float(np.mean([np.abs(x - y).mean() for x, y in zip(mags_a, mags_b)]))


def _cmd_analyze(args) -> int:
    x = read_wav(args.input)
    tool = build_tool_config(x.sample_rate, _overrides(args))
    f0, harmonics, noise = analyze(x, tool.analysis, tool.spectral)
    bundle = FeatureBundle(
        f0=f0,
        harmonics=harmonics,
        noise=noise,
        sample_rate=x.sample_rate,
        spectral=tool.spectral,
        analysis=tool.analysis,
    )
    save_features(bundle, args.output)
    return 0


def _cmd_synth(args) -> int:
    overrides = _overrides(args)
    bundle = load_features(args.input)
    y = render_bundle(bundle, seed=_seed(args, overrides))
    clipped = write_wav(y, args.output, args.format)
    if clipped:
        print(f"hnsynth: clipped {clipped} samples", file=sys.stderr)
    return 0


def _cmd_resynth(args) -> int:
    x = read_wav(args.input)
    overrides = _overrides(args)
    tool = build_tool_config(x.sample_rate, overrides)
    f0, harmonics, noise = analyze(x, tool.analysis, tool.spectral)
    bundle = FeatureBundle(
        f0=f0,
        harmonics=harmonics,
        noise=noise,
        sample_rate=x.sample_rate,
        spectral=tool.spectral,
        analysis=tool.analysis,
    )
    rendered = render_bundle(bundle, seed=_seed(args, overrides))
    y = Waveform(rendered.samples[: len(x)], x.sample_rate)
    clipped = write_wav(y, args.output, args.format)
    f0_again = estimate_f0(y, tool.analysis)
    report = {
        "mel_l1": mel_l1(y, x, tool.mel),
        "dsp_loss": dsp_loss(y, x, tool.mel, tool.weights),
        "f0_rmse_hz": f0_rmse(f0_again, f0),
        "mrs_l1": _mrs_l1(y, x, tool.mrs_fft_sizes),
        "clipped_samples": clipped,
        "n_samples": len(x),
        "sample_rate": x.sample_rate,
    }
    _emit_report(report, args.report)
    return 0


def _cmd_metrics(args) -> int:
    a = read_wav(args.a)
    b = read_wav(args.b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)} samples")
    if a.sample_rate != b.sample_rate:
        raise ValueError(f"sample rate mismatch: {a.sample_rate} vs {b.sample_rate}")
    tool = build_tool_config(a.sample_rate, _overrides(args))
    report = {
        "mel_l1": mel_l1(a, b, tool.mel),
        "dsp_loss": dsp_loss(a, b, tool.mel, tool.weights),
        "f0_rmse_hz": f0_rmse(estimate_f0(a, tool.analysis), estimate_f0(b, tool.analysis)),
        "mrs_l1": _mrs_l1(a, b, tool.mrs_fft_sizes),
        "n_samples": len(a),
        "sample_rate": a.sample_rate,
    }
    _emit_report(report, None)
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except FormatError as exc:
        print(f"hnsynth: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"hnsynth: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"hnsynth: {exc}", file=sys.stderr)
        return 5


def main() -> None:
    sys.exit(cli_main())
