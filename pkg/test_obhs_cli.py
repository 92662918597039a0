from __future__ import annotations

import ast
from pathlib import Path

import pytest

from audio_io.wav_io import read_wav
from src.obhs_cli import EXIT_CORRUPT, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from utils.config import load_settings


@pytest.fixture(autouse=True)
def _isolated_env(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in ("OBHS_BLOCK_SIZE", "OBHS_SEED", "OBHS_SECONDS", "OBHS_SAMPLE_RATE", "OBHS_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("OBHS_ARTIFACTS_DIR", str(tmp_path / "artifacts"))


def _gen(tmp_path: Path, kind: str, name: str, *extra: str) -> Path:
    out = tmp_path / name
    assert main(["gen", kind, "--out", str(out), *extra]) == EXIT_OK
    return out


# =========================
# gen
# =========================
def test_gen_silence_ten_seconds(tmp_path):
    wav = _gen(tmp_path, "silence", "silence.wav", "--seconds", "10")
    assert wav.stat().st_size == 882044


def test_gen_pink_is_reproducible(tmp_path):
    a = _gen(tmp_path, "pink", "a.wav", "--seconds", "0.5", "--seed", "42")
    b = _gen(tmp_path, "pink", "b.wav", "--seconds", "0.5", "--seed", "42")
    assert a.read_bytes() == b.read_bytes()


def test_gen_tone_above_nyquist_is_usage_error(tmp_path, capsys):
    out = tmp_path / "tone.wav"
    code = main(["gen", "tone", "--out", str(out), "--frequency", "30000"])
    assert code == EXIT_USAGE
    assert "Nyquist" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_command_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["compress", "x.wav"])
    assert info.value.code == EXIT_USAGE


# =========================
# encode / decode / verify
# =========================
def test_encode_decode_round_trip(tmp_path, capsys):
    wav = _gen(tmp_path, "pink", "pink.wav", "--seconds", "1", "--amplitude", "0.01")
    stream = tmp_path / "pink.obhs"
    restored = tmp_path / "restored.wav"

    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK
    assert "ratio=" in capsys.readouterr().out
    assert stream.read_bytes()[:4] == b"OBHS"
    assert stream.stat().st_size < wav.stat().st_size

    assert main(["decode", str(stream), "--out", str(restored)]) == EXIT_OK
    assert restored.read_bytes() == wav.read_bytes()


def test_encode_default_output_name(tmp_path):
    wav = _gen(tmp_path, "silence", "quiet.wav", "--seconds", "0.1")
    assert main(["encode", str(wav)]) == EXIT_OK
    assert (tmp_path / "quiet.obhs").exists()


def test_parallel_encode_is_identical(tmp_path):
    wav = _gen(tmp_path, "tone", "tone.wav", "--seconds", "1", "--amplitude", "0.005")
    seq, par = tmp_path / "seq.obhs", tmp_path / "par.obhs"
    assert main(["encode", str(wav), "--out", str(seq)]) == EXIT_OK
    assert main(["encode", str(wav), "--out", str(par), "--parallel"]) == EXIT_OK
    assert seq.read_bytes() == par.read_bytes()


@pytest.mark.parametrize("kind", ["silence", "tone", "pink"])
def test_verify_generated_signals(tmp_path, capsys, kind):
    wav = _gen(tmp_path, kind, f"{kind}.wav", "--seconds", "0.5")
    assert main(["verify", str(wav), "--block-size", "1024"]) == EXIT_OK
    assert "Lossless round trip OK" in capsys.readouterr().out


def test_encode_missing_input_is_io_error(tmp_path):
    out = tmp_path / "missing.obhs"
    assert main(["encode", str(tmp_path / "missing.wav"), "--out", str(out)]) == EXIT_IO
    assert not out.exists()


def test_encode_rejects_bad_block_size(tmp_path):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "0.1")
    assert main(["encode", str(wav), "--block-size", "100"]) == EXIT_USAGE


def test_encode_rejects_non_16_bit_wav(tmp_path):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "0.1")
    data = bytearray(wav.read_bytes())
    data[34] = 8
    wav.write_bytes(bytes(data))
    assert main(["encode", str(wav)]) == EXIT_CORRUPT
    assert not (tmp_path / "s.obhs").exists()


def test_decode_unknown_version(tmp_path):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "0.5")
    stream = tmp_path / "s.obhs"
    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK

    data = bytearray(stream.read_bytes())
    data[4] = 2
    stream.write_bytes(bytes(data))
    out = tmp_path / "out.wav"
    assert main(["decode", str(stream), "--out", str(out)]) == EXIT_CORRUPT
    assert not out.exists()


def test_decode_truncated_stream_names_block(tmp_path, capsys):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "1")
    stream = tmp_path / "s.obhs"
    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK
    capsys.readouterr()

    stream.write_bytes(stream.read_bytes()[:-50])
    out = tmp_path / "out.wav"
    assert main(["decode", str(stream), "--out", str(out)]) == EXIT_CORRUPT
    assert "block" in capsys.readouterr().err
    assert not out.exists()


def test_decode_partial_frame_stream_is_corrupt(tmp_path, capsys):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", str(3 / 44100))
    stream = tmp_path / "s.obhs"
    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK
    capsys.readouterr()

    data = bytearray(stream.read_bytes())
    assert int.from_bytes(data[16:24], "little") == 3
    data[6] = 2
    stream.write_bytes(bytes(data))
    out = tmp_path / "out.wav"
    assert main(["decode", str(stream), "--out", str(out)]) == EXIT_CORRUPT
    assert "frames" in capsys.readouterr().err
    assert not out.exists()


def test_inspect_reports_blocks(tmp_path, capsys):
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "1")
    stream = tmp_path / "s.obhs"
    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK
    capsys.readouterr()

    assert main(["inspect", str(stream)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "total_samples:   44100" in out
    assert "blocks:          11 (huffman=11, raw=0)" in out
    assert "entropy:         0.000 bits/sample" in out
    assert "92.88 ms" in out


# =========================
# config
# =========================
def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("OBHS_BLOCK_SIZE", "1024")
    monkeypatch.setenv("OBHS_SEED", "7")
    settings = load_settings()
    assert settings.block_size == 1024
    assert settings.seed == 7


@pytest.mark.parametrize("name, value", [("OBHS_BLOCK_SIZE", "12"), ("OBHS_BLOCK_SIZE", "big"), ("OBHS_SECONDS", "x")])
def test_bad_settings_are_rejected(monkeypatch, capsys, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(RuntimeError):
        load_settings()
    assert main(["gen", "silence", "--out", "x.wav"]) == EXIT_USAGE
    assert "Configuration error" in capsys.readouterr().err


def test_block_size_setting_is_cli_default(tmp_path, monkeypatch):
    monkeypatch.setenv("OBHS_BLOCK_SIZE", "256")
    wav = _gen(tmp_path, "silence", "s.wav", "--seconds", "0.1")
    stream = tmp_path / "s.obhs"
    assert main(["encode", str(wav), "--out", str(stream)]) == EXIT_OK
    assert int.from_bytes(stream.read_bytes()[12:16], "little") == 256
    meta, samples = read_wav(wav)
    assert samples.size == 4410


_PACKAGES = ("audio_io", "bench", "codec", "container", "huffman", "signals", "src", "utils")
_MODULES = sorted(p for pkg in _PACKAGES for p in (Path(__file__).parent / pkg).glob("*.py"))


@pytest.mark.parametrize("path", _MODULES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_top_level_definitions_are_separated(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    for node in ast.parse("\n".join(lines)).body[1:]:
        if not isinstance(node, (ast.FunctionDef, ast.ClassDef)):
            continue
        first = min([node.lineno] + [d.lineno for d in node.decorator_list]) - 1
        above = first - 1
        while above >= 0 and lines[above].startswith("#"):
            above -= 1
        assert lines[above - 1 : above + 1] == ["", ""], f"{path.name}:{first + 1}"
