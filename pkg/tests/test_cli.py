import hashlib

import numpy as np
import pytest

from harmonia import cli
from harmonia.audio_io import parse_event_script, read_wav, write_wav
from conftest import sine, spectral_peak_hz, write_model

SR = 44100


def run(argv):
    return cli.main(argv)


def write_events(path, rows):
    path.write_text("time_s,event,note,velocity\n" + "\n".join(rows) + "\n")
    return path


# -- audio_io ----------------------------------------------------------------

def test_wav_round_trip_float32(tmp_path):
    data = sine(440, 0.1, SR) * 0.5
    path = tmp_path / "t.wav"
    write_wav(path, data, SR, "float32")
    back, rate = read_wav(path)
    assert rate == SR
    assert np.max(np.abs(back - data)) < 1e-6


def test_wav_round_trip_int16(tmp_path):
    data = sine(440, 0.1, SR) * 0.5
    path = tmp_path / "t.wav"
    write_wav(path, data, SR, "int16")
    back, _ = read_wav(path)
    assert np.max(np.abs(back - data)) < 1e-3


def test_wav_stereo_downmix(tmp_path):
    left = sine(440, 0.05, SR)
    right = np.zeros_like(left)
    path = tmp_path / "st.wav"
    write_wav(path, np.stack([left, right], axis=1), SR, "float32")
    mono, _ = read_wav(path)
    assert np.max(np.abs(mono - left / 2)) < 1e-6


def test_event_script_parsing(tmp_path):
    path = write_events(tmp_path / "e.csv", [
        "0.5,note_on,69,127", "0.0,note_on,60,100", "1.0,note_off,69,0"])
    events = parse_event_script(path)
    assert [t for t, _ in events] == [0.0, 0.5, 1.0]
    assert events[1][1].kind == "on"
    assert events[2][1].kind == "off"


def test_event_script_rejects_garbage(tmp_path):
    path = (tmp_path / "bad.csv")
    path.write_text("0.0,explode,69,127\n")
    with pytest.raises(ValueError):
        parse_event_script(path)


# -- render ------------------------------------------------------------------

def test_render_silence_in_silence_out(tmp_path, mono_model_root):
    in_path = tmp_path / "in.wav"
    write_wav(in_path, np.zeros(SR), SR, "float32")
    out_path = tmp_path / "out.wav"
    code = run(["render", "--in", str(in_path), "--model", "mono",
                "--root", str(mono_model_root), "--out", str(out_path)])
    assert code == 0
    rendered, _ = read_wav(out_path)
    peak = np.max(np.abs(rendered))
    assert 20 * np.log10(peak + 1e-30) < -90.0


def test_render_line_mode_tracks_pitch(tmp_path, mono_model_root):
    in_path = tmp_path / "in.wav"
    write_wav(in_path, sine(330, 1.0, SR, 0.5), SR, "float32")
    out_path = tmp_path / "out.wav"
    code = run(["render", "--in", str(in_path), "--model", "mono",
                "--mode", "line", "--root", str(mono_model_root),
                "--out", str(out_path)])
    assert code == 0
    rendered, rate = read_wav(out_path)
    assert rate == SR
    assert rendered.size == SR
    settled = rendered[8192:]
    peak_hz = spectral_peak_hz(settled, SR)
    assert abs(peak_hz - 330.0) <= SR / settled.size + 1.0


def test_render_same_seed_is_byte_identical(tmp_path, mono_model_root):
    events = write_events(tmp_path / "e.csv",
                          ["0.0,note_on,69,120", "0.8,note_off,69,0"])

    def render(out_name):
        out = tmp_path / out_name
        code = run(["render", "--in", str(events), "--model", "mono",
                    "--root", str(mono_model_root), "--seed", "7",
                    "--set", "noise_gain=2.0", "--out", str(out)])
        assert code == 0
        return hashlib.sha256(out.read_bytes()).hexdigest()

    assert render("a.wav") == render("b.wav")


def test_render_event_script_midi_mode(tmp_path, mono_model_root):
    events = write_events(tmp_path / "e.csv",
                          ["0.0,note_on,57,127", "0.5,note_off,57,0"])
    out_path = tmp_path / "out.wav"
    code = run(["render", "--in", str(events), "--model", "mono",
                "--root", str(mono_model_root), "--out", str(out_path),
                "--set", "reverb_mix=0"])
    assert code == 0
    rendered, _ = read_wav(out_path)
    voiced = rendered[:int(0.5 * SR)]
    assert abs(spectral_peak_hz(voiced, SR) - 220.0) <= SR / voiced.size + 1.0


def test_render_writes_spectrogram_csv(tmp_path, mono_model_root):
    events = write_events(tmp_path / "e.csv", ["0.0,note_on,69,127"])
    out_path = tmp_path / "out.wav"
    spec_path = tmp_path / "spec.csv"
    code = run(["render", "--in", str(events), "--model", "mono",
                "--root", str(mono_model_root), "--out", str(out_path),
                "--spectrogram", str(spec_path)])
    assert code == 0
    grid = np.loadtxt(spec_path, delimiter=",")
    assert grid.ndim == 2
    assert grid.shape[1] == 1024 // 2 + 1
    assert np.all(grid <= 0.0) and np.all(grid >= -120.0)


def test_render_macro_override_applies(tmp_path, mono_model_root):
    events = write_events(tmp_path / "e.csv",
                          ["0.0,note_on,69,127", "0.5,note_off,69,0"])

    def peak_with_gain(gain, name):
        out = tmp_path / name
        code = run(["render", "--in", str(events), "--model", "mono",
                    "--root", str(mono_model_root), "--out", str(out),
                    "--set", f"master_gain={gain}"])
        assert code == 0
        rendered, _ = read_wav(out)
        return np.max(np.abs(rendered))

    assert peak_with_gain(0.1, "soft.wav") < peak_with_gain(0.8, "loud.wav")


def test_render_missing_input_exit_code(tmp_path, mono_model_root):
    code = run(["render", "--in", str(tmp_path / "ghost.wav"),
                "--model", "mono", "--root", str(mono_model_root),
                "--out", str(tmp_path / "o.wav")])
    assert code == cli.EXIT_INPUT


def test_render_unknown_model_exit_code(tmp_path, mono_model_root):
    in_path = tmp_path / "in.wav"
    write_wav(in_path, np.zeros(4096), SR, "float32")
    code = run(["render", "--in", str(in_path), "--model", "ghost",
                "--root", str(mono_model_root), "--out", str(tmp_path / "o.wav")])
    assert code == cli.EXIT_MODEL


def test_render_unwritable_output_exit_code(tmp_path, mono_model_root):
    in_path = tmp_path / "in.wav"
    write_wav(in_path, np.zeros(4096), SR, "float32")
    code = run(["render", "--in", str(in_path), "--model", "mono",
                "--root", str(mono_model_root),
                "--out", str(tmp_path / "no" / "dir" / "o.wav")])
    assert code == cli.EXIT_OUTPUT


# -- analyze -----------------------------------------------------------------

def read_analysis(capsys):
    lines = capsys.readouterr().out.strip().splitlines()
    return [line.split(",") for line in lines[1:]]


def test_analyze_sine(tmp_path, capsys):
    in_path = tmp_path / "a.wav"
    write_wav(in_path, sine(440, 1.0, SR, 0.8), SR, "float32")
    assert run(["analyze", "--in", str(in_path)]) == 0
    rows = read_analysis(capsys)
    assert len(rows) >= 20
    for row in rows[:-1]:  # final row may be zero-padded
        assert row[1], "expected voiced"
        assert abs(float(row[1]) - 440.0) <= 2.0


def test_analyze_silence(tmp_path, capsys):
    in_path = tmp_path / "s.wav"
    write_wav(in_path, np.zeros(SR // 2), SR, "float32")
    assert run(["analyze", "--in", str(in_path)]) == 0
    for row in read_analysis(capsys):
        assert row[1] == ""
        assert float(row[3]) == -120.0


def test_analyze_48k(tmp_path, capsys):
    in_path = tmp_path / "a48.wav"
    write_wav(in_path, sine(440, 1.0, 48000, 0.8), 48000, "float32")
    assert run(["analyze", "--in", str(in_path)]) == 0
    rows = read_analysis(capsys)
    for row in rows[:-1]:
        assert abs(float(row[1]) - 440.0) <= 2.0


def test_analyze_missing_file(tmp_path):
    assert run(["analyze", "--in", str(tmp_path / "nope.wav")]) == cli.EXIT_INPUT


# -- models ------------------------------------------------------------------

def test_models_lists_shipped_fixtures(shipped_models_root, capsys):
    assert run(["models", "--root", str(shipped_models_root)]) == 0
    out = capsys.readouterr().out
    for name in ("violin", "flute", "saxophone", "trumpet"):
        assert name in out


def test_models_reports_corrupt_entry(tmp_path, capsys):
    for name in ("a", "b", "c"):
        write_model(tmp_path, name)
    bad = tmp_path / "broken"
    bad.mkdir()
    (bad / "model.json").write_text("{")
    assert run(["models", "--root", str(tmp_path)]) == 0
    captured = capsys.readouterr()
    assert len([l for l in captured.out.splitlines() if ": K=" in l]) == 3
    assert "broken" in captured.err


def test_models_empty_root_fails(tmp_path):
    assert run(["models", "--root", str(tmp_path)]) == cli.EXIT_MODEL


def test_models_env_var_default(tmp_path, monkeypatch, capsys):
    write_model(tmp_path, "envy")
    monkeypatch.setenv("HARMONIA_MODEL_ROOT", str(tmp_path))
    assert run(["models"]) == 0
    assert "envy" in capsys.readouterr().out


def test_render_48k_line_mode(tmp_path, mono_model_root):
    rate = 48000
    in_path = tmp_path / "in48.wav"
    write_wav(in_path, sine(330, 1.0, rate, 0.5), rate, "float32")
    out_path = tmp_path / "out48.wav"
    code = run(["render", "--in", str(in_path), "--model", "mono",
                "--root", str(mono_model_root), "--out", str(out_path)])
    assert code == 0
    rendered, out_rate = read_wav(out_path)
    assert out_rate == rate
    settled = rendered[8192:]
    assert abs(spectral_peak_hz(settled, rate) - 330.0) <= rate / settled.size + 1.0


# -- live --------------------------------------------------------------------

def test_live_prints_port_and_exits_cleanly_on_sigint(tmp_path, mono_model_root):
    import signal
    import subprocess
    import sys as _sys
    import time as _time

    proc = subprocess.Popen(
        [_sys.executable, "-m", "harmonia.cli", "live",
         "--root", str(mono_model_root), "--model", "mono",
         "--port", "0", "--buffer", "512"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    try:
        port_line = None
        deadline = _time.monotonic() + 15
        while _time.monotonic() < deadline:
            line = proc.stdout.readline()
            if not line:
                break
            if "control server:" in line:
                port_line = line
                break
        assert port_line is not None, "server never announced its port"
        assert "ws://" in port_line and "/ws" in port_line
        proc.send_signal(signal.SIGINT)
        assert proc.wait(timeout=15) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
        proc.stdout.close()
