"""Config file parsing, schema enforcement, and precedence."""

import pytest

from hnsynth.config import SCHEMA, build_tool_config, describe_schema, parse_config_file
from hnsynth.errors import FormatError


def write_cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return path


def test_parse_typed_values_with_comments(tmp_path):
    path = write_cfg(
        tmp_path,
        """
        # tuned for a studio take
        fft_size = 1024
        hop_size = 256
        win_size = 1024
        window = hamming
        center = false
        f_max = none
        mrs_fft_sizes = 256, 512, 1024
        harmonic_floor = 0.02   # trailing comment
        """,
    )
    overrides = parse_config_file(path)
    assert overrides["fft_size"] == 1024
    assert overrides["window"] == "hamming"
    assert overrides["center"] is False
    assert overrides["f_max"] is None
    assert overrides["mrs_fft_sizes"] == (256, 512, 1024)
    assert overrides["harmonic_floor"] == 0.02


def test_unknown_key_rejected_with_line_number(tmp_path):
    path = write_cfg(tmp_path, "fft_size = 512\nbogus_key = 1\n")
    with pytest.raises(FormatError) as err:
        parse_config_file(path)
    assert err.value.line == 2


def test_bad_value_rejected(tmp_path):
    path = write_cfg(tmp_path, "n_mels = eighty\n")
    with pytest.raises(FormatError):
        parse_config_file(path)


def test_missing_equals_rejected(tmp_path):
    path = write_cfg(tmp_path, "n_mels 80\n")
    with pytest.raises(FormatError):
        parse_config_file(path)


def test_defaults_depend_on_sample_rate():
    hi = build_tool_config(44100)
    lo = build_tool_config(22050)
    assert hi.spectral.fft_size == 2048 and hi.spectral.hop_size == 512
    assert lo.spectral.fft_size == 1024 and lo.spectral.hop_size == 256
    # analysis hop always follows the spectral hop
    assert hi.analysis.hop_size == hi.spectral.hop_size
    assert lo.analysis.hop_size == lo.spectral.hop_size


def test_overrides_beat_defaults():
    tool = build_tool_config(44100, {"fft_size": 1024, "hop_size": 256, "win_size": 1024, "n_mels": 64})
    assert tool.spectral.fft_size == 1024
    assert tool.mel.n_mels == 64
    assert tool.analysis.hop_size == 256


def test_tool_refinement_default_is_two_passes():
    # the estimator ships with refine_iters 0; the tool layer turns on two
    assert build_tool_config(22050).analysis.refine_iters == 2
    assert build_tool_config(22050, {"refine_iters": 0}).analysis.refine_iters == 0


def test_domain_violations_surface_as_value_error():
    with pytest.raises(ValueError):
        build_tool_config(22050, {"hop_size": 0})
    with pytest.raises(ValueError):
        build_tool_config(22050, {"unknown_thing": 1})
    with pytest.raises(ValueError):
        build_tool_config(22050, {"mrs_fft_sizes": (500,)})
    with pytest.raises(ValueError):
        build_tool_config(22050, {"seed": -3})


def test_schema_doc_covers_every_key():
    doc = describe_schema()
    for key in SCHEMA:
        assert key in doc
