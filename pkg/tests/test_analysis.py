import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harmonia.analysis import YinConfig, loudness_db, midi_to_controls, yin_f0

SR = 44100.0


def make_sine(freq, n=2048, sr=SR, amplitude=1.0):
    return amplitude * np.sin(2 * np.pi * freq * np.arange(n) / sr)


def bandlimited_square(freq, n, sr):
    t = np.arange(n) / sr
    x = np.zeros(n)
    k = 1
    while k * freq < sr / 2:
        x += np.sin(2 * np.pi * k * freq * t) / k
        k += 2
    return x


def brute_force_period(x, tau_min, tau_max):
    """Direct time-domain period search, no FFT identity.

    The period is the smallest lag whose normalized difference is close to
    the global minimum (larger multiples of the true period dip too).
    """
    d = np.empty(tau_max + 1)
    d[0] = 0.0
    for tau in range(1, tau_max + 1):
        diff = x[:-tau] - x[tau:]
        d[tau] = float(np.dot(diff, diff))
    cmnd = np.ones(tau_max + 1)
    running = 0.0
    for tau in range(1, tau_max + 1):
        running += d[tau]
        cmnd[tau] = d[tau] * tau / running if running > 0 else 1.0
    for tau in range(tau_min, tau_max):
        if cmnd[tau] < 0.1 and cmnd[tau] <= cmnd[tau + 1] and cmnd[tau] <= cmnd[tau - 1]:
            return tau
    return tau_min + int(np.argmin(cmnd[tau_min:tau_max + 1]))


def test_yin_sine_440_matches_oracle():
    x = make_sine(440.0)
    f0, confidence = yin_f0(x, SR)
    assert f0 == pytest.approx(440.0, abs=2.0)
    assert confidence > 0.9
    oracle_tau = brute_force_period(x, 22, 882)
    assert abs(SR / oracle_tau - f0) < 2.5


def test_yin_zero_buffer_is_unvoiced():
    f0, confidence = yin_f0(np.zeros(2048), SR)
    assert f0 is None
    assert confidence == 0.0


def test_yin_square_wave_finds_fundamental_not_overtone():
    x = bandlimited_square(100.0, 4096, SR)
    f0, _ = yin_f0(x, SR)
    assert f0 == pytest.approx(100.0, abs=2.0)
    oracle_tau = brute_force_period(x[-2048:], 22, 882)
    assert SR / oracle_tau == pytest.approx(100.0, abs=2.0)


def test_yin_sweep_accuracy():
    for freq in np.linspace(80, 1000, 24):
        f0, _ = yin_f0(make_sine(freq), SR)
        assert f0 is not None, freq
        assert abs(f0 - freq) / freq < 0.005, freq


@given(st.floats(min_value=1e-3, max_value=1e3))
@settings(max_examples=25, deadline=None)
def test_yin_amplitude_invariant(gain):
    base, _ = yin_f0(make_sine(220.0), SR)
    scaled, _ = yin_f0(make_sine(220.0, amplitude=gain), SR)
    assert scaled == pytest.approx(base, rel=1e-9)


def test_yin_uses_most_recent_window():
    x = np.concatenate([np.zeros(1024), make_sine(330.0, 2048)])
    f0, _ = yin_f0(x, SR)
    assert f0 == pytest.approx(330.0, abs=2.0)


def test_yin_rejects_short_buffer():
    with pytest.raises(ValueError):
        yin_f0(np.zeros(512), SR)


def test_yin_rejects_bad_config():
    with pytest.raises(ValueError):
        yin_f0(np.zeros(4096), SR, YinConfig(f_min=0.0))
    with pytest.raises(ValueError):
        yin_f0(np.zeros(4096), SR, YinConfig(window=3000))
    with pytest.raises(ValueError):
        yin_f0(np.zeros(4096), SR, YinConfig(f_max=30000.0))
    with pytest.raises(ValueError):
        yin_f0(np.zeros(4096), SR, YinConfig(threshold=1.5))


def test_loudness_floor_on_silence():
    assert loudness_db(np.zeros(256)) == -120.0


def test_loudness_full_scale_square_is_zero_db():
    x = np.ones(512)
    x[::2] = -1.0
    assert loudness_db(x) == 0.0


def test_loudness_unit_sine():
    x = make_sine(100.0, n=44100)
    assert loudness_db(x) == pytest.approx(-3.01, abs=0.05)


def test_loudness_rejects_empty():
    with pytest.raises(ValueError):
        loudness_db(np.array([]))


@given(st.floats(min_value=0.0, max_value=1.0),
       st.floats(min_value=1.0, max_value=10.0))
@settings(max_examples=25, deadline=None)
def test_loudness_monotone_in_gain(base_gain, boost):
    x = make_sine(150.0, n=1024)
    assert loudness_db(base_gain * boost * x) >= loudness_db(base_gain * x)


def test_midi_tuning_reference():
    assert midi_to_controls(69, 127) == (440.0, 0.0)


def test_midi_octave_down():
    f0, ld = midi_to_controls(57, 127)
    assert f0 == pytest.approx(220.0)
    assert ld == 0.0


def test_midi_velocity_map():
    _f0, ld = midi_to_controls(69, 64)
    assert ld == pytest.approx(-29.763779527559056, abs=0.01)


def test_midi_pitch_bend():
    f0, _ = midi_to_controls(69, 100, pitch_bend=2.0)
    assert f0 == pytest.approx(440.0 * 2 ** (2 / 12))


@given(st.integers(min_value=0, max_value=127))
def test_midi_round_trip(note):
    f0, _ = midi_to_controls(note, 100)
    recovered = round(12 * np.log2(f0 / 440.0) + 69)
    assert recovered == note


def test_midi_rejects_out_of_range():
    with pytest.raises(ValueError):
        midi_to_controls(128, 64)
    with pytest.raises(ValueError):
        midi_to_controls(60, -1)
