#!/usr/bin/env python3
"""Generate the bundled synthetic timbre models.

These are hand-designed spectral recipes (rolloff + formant bumps + shaped
breath noise), not trained timbres; they exist so the engine has four
playable models named violin/flute/saxophone/trumpet out of the box and so
tests have deterministic fixtures. Regenerate with:

    python scripts/make_fixture_models.py --root models
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from harmonia.timbre import TimbreModel, save_model  # noqa: E402

K = 60
N = 65
PITCH_GRID = [36.0, 48.0, 60.0, 72.0, 84.0, 96.0]
LOUDNESS_GRID = [-60.0, -45.0, -30.0, -15.0, 0.0]
SAMPLE_RATE = 44100.0

# name -> (rolloff slope, darkening per 60 dB quieter, formants [(Hz, octaves, gain)],
#          noise ratio, noise center Hz, noise width octaves)
RECIPES = {
    "violin": (1.0, 0.8, [(300.0, 0.6, 2.0), (2500.0, 0.7, 2.5)], 0.02, 3000.0, 1.2),
    "flute": (2.2, 0.6, [(800.0, 0.8, 1.5)], 0.10, 4000.0, 1.0),
    "saxophone": (1.1, 0.7, [(800.0, 0.5, 2.5), (2000.0, 0.6, 1.8)], 0.04, 2500.0, 1.1),
    "trumpet": (0.7, 1.1, [(1200.0, 0.8, 2.2)], 0.015, 5000.0, 0.9),
}


def _formant_gain(freqs_hz, formants):
    gain = np.ones_like(freqs_hz)
    safe = np.maximum(freqs_hz, 1.0)
    for center, width_oct, amount in formants:
        octaves = np.log2(safe / center)
        gain += (amount - 1.0) * np.exp(-0.5 * (octaves / width_oct) ** 2)
    return gain


def _harmonics_for(f0, loudness_db, slope, darken, formants):
    k = np.arange(1, K + 1, dtype=np.float64)
    quiet = -loudness_db / 60.0  # 0 at full scale, 1 at -60 dB
    rolloff = k ** -(slope + darken * quiet)
    weights = rolloff * _formant_gain(k * f0, formants)
    weights[k * f0 >= 20000.0] *= 0.01  # keep ultrasonics negligible
    return weights / weights.sum()


def _noise_for(amplitude, ratio, center_hz, width_oct):
    freqs = np.arange(N) * (SAMPLE_RATE / 2.0) / (N - 1)
    octaves = np.log2(np.maximum(freqs, 20.0) / center_hz)
    shape = np.exp(-0.5 * (octaves / width_oct) ** 2) + 0.02
    return amplitude * ratio * shape


def build_model(name: str) -> TimbreModel:
    slope, darken, formants, noise_ratio, noise_center, noise_width = RECIPES[name]
    p, l = len(PITCH_GRID), len(LOUDNESS_GRID)
    amplitude = np.zeros((p, l))
    harmonic_frames = np.zeros((p, l, K))
    noise_frames = np.zeros((p, l, N))
    for pi, pitch in enumerate(PITCH_GRID):
        f0 = 440.0 * 2.0 ** ((pitch - 69.0) / 12.0)
        for li, ld in enumerate(LOUDNESS_GRID):
            amp = 0.8 * 10.0 ** (ld / 20.0)
            amplitude[pi, li] = amp
            harmonic_frames[pi, li] = _harmonics_for(f0, ld, slope, darken, formants)
            noise_frames[pi, li] = _noise_for(amp, noise_ratio, noise_center,
                                              noise_width)
    return TimbreModel(
        name=name, harmonics=K, noise_bins=N,
        pitch_grid=np.asarray(PITCH_GRID), loudness_grid=np.asarray(LOUDNESS_GRID),
        amplitude=amplitude, harmonic_frames=harmonic_frames,
        noise_frames=noise_frames,
        metadata={"kind": "synthetic fixture",
                  "generator": "scripts/make_fixture_models.py"})


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default="models")
    args = parser.parse_args()
    for name in RECIPES:
        path = save_model(build_model(name), args.root)
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
