import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

REPO_ROOT = Path(__file__).resolve().parents[1]


def write_model(root, name="mono", harmonics=1, noise_bins=8,
                pitch_grid=(30.0, 60.0, 90.0),
                loudness_grid=(-60.0, -30.0, 0.0),
                harmonic_weights=None, noise_level=0.0, amplitude_at_full=1.0,
                extra=None):
    """Write a small valid model.json; amplitude scales linearly with
    loudness row so velocity audibly matters. Returns the model directory."""
    p, l = len(pitch_grid), len(loudness_grid)
    weights = harmonic_weights
    if weights is None:
        weights = [1.0] + [0.0] * (harmonics - 1)
    rows = []
    for _pi in range(p):
        row = []
        for li in range(l):
            amp = amplitude_at_full * 10.0 ** (loudness_grid[li] / 20.0)
            row.append({
                "amplitude": amp,
                "harmonics": list(weights),
                "noise": [noise_level * amp] * noise_bins,
            })
        rows.append(row)
    payload = {
        "format_version": 1,
        "name": name,
        "harmonics": harmonics,
        "noise_bins": noise_bins,
        "pitch_grid": list(pitch_grid),
        "loudness_grid": list(loudness_grid),
        "frames": rows,
        "metadata": {"kind": "test fixture"},
    }
    if extra:
        payload.update(extra)
    model_dir = Path(root) / name
    model_dir.mkdir(parents=True, exist_ok=True)
    (model_dir / "model.json").write_text(json.dumps(payload))
    return model_dir


@pytest.fixture
def mono_model_root(tmp_path):
    """Root with one single-harmonic, noise-free model named 'mono'."""
    write_model(tmp_path, "mono")
    return tmp_path


@pytest.fixture
def shipped_models_root():
    root = REPO_ROOT / "models"
    if not (root / "violin" / "model.json").is_file():
        pytest.skip("bundled models not generated")
    return root


def sine(freq, seconds, sample_rate, amplitude=1.0):
    n = int(round(seconds * sample_rate))
    return amplitude * np.sin(2 * np.pi * freq * np.arange(n) / sample_rate)


def spectral_peak_hz(samples, sample_rate):
    """Frequency of the FFT magnitude peak (ignoring DC)."""
    spec = np.abs(np.fft.rfft(samples))
    spec[0] = 0.0
    return np.argmax(spec) * sample_rate / samples.size
