"""Per-buffer input analysis: YIN pitch tracking, RMS loudness, MIDI mapping.

All functions are pure over caller-provided buffers; one AnalysisFrame is
produced per audio buffer by the engine, with no smoothing here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controls import LOUDNESS_FLOOR_DB


@dataclass
class YinConfig:
    f_min: float = 50.0
    f_max: float = 2000.0
    threshold: float = 0.15
    window: int = 2048

    def validate(self, sample_rate: float) -> None:
        if not 0.0 < self.f_min < self.f_max:
            raise ValueError("yin config: need 0 < f_min < f_max")
        if self.f_max >= sample_rate / 2:
            raise ValueError("yin config: f_max must be below Nyquist")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("yin config: threshold must lie in (0, 1)")
        if self.window < 2 or self.window > 4096 or self.window & (self.window - 1):
            raise ValueError("yin config: window must be a power of two <= 4096")
        if self.window < 2 * sample_rate / self.f_max:
            raise ValueError("yin config: window shorter than two periods of f_max")
        if math.ceil(sample_rate / self.f_min) > self.window - 2:
            raise ValueError("yin config: f_min period does not fit the window")


def _difference_function(x: np.ndarray, tau_max: int) -> np.ndarray:
    """d(tau) for tau in 0..tau_max over a shrinking summation window.

    d(tau) = sum_{j<W-tau} (x_j - x_{j+tau})^2, computed via the energy +
    FFT-autocorrelation identity so the cost stays O(W log W).
    """
    w = x.size
    cum = np.concatenate(([0.0], np.cumsum(x * x)))
    n_fft = 1 << int(math.ceil(math.log2(2 * w)))
    spec = np.fft.rfft(x, n_fft)
    acf = np.fft.irfft(spec * spec.conjugate(), n_fft)[:tau_max + 1]
    taus = np.arange(tau_max + 1)
    # energy of x[0:W-tau] plus energy of x[tau:W], minus twice the lag product
    d = cum[w - taus] + (cum[w] - cum[taus]) - 2.0 * acf
    return np.maximum(d, 0.0)


def _cmndf(d: np.ndarray) -> np.ndarray:
    """Cumulative mean normalized difference; d'(0) = 1, 0/0 defined as 1."""
    out = np.ones_like(d)
    running = np.cumsum(d[1:])
    taus = np.arange(1, d.size)
    nonzero = running > 0.0
    out[1:][nonzero] = d[1:][nonzero] * taus[nonzero] / running[nonzero]
    return out


def yin_f0(buffer, sample_rate: float, cfg: YinConfig | None = None):
    """Estimate (f0_hz, confidence) from the most recent cfg.window samples.

    Returns (None, 0.0) when no lag in [f_min, f_max] dips below the
    threshold. Confidence is 1 - d'(tau) at the chosen lag.
    """
    cfg = cfg or YinConfig()
    cfg.validate(sample_rate)
    x = np.asarray(buffer, dtype=np.float64).reshape(-1)
    if x.size < cfg.window:
        raise ValueError(f"buffer shorter than yin window ({x.size} < {cfg.window})")
    x = x[-cfg.window:]

    tau_min = max(2, int(math.floor(sample_rate / cfg.f_max)))
    tau_max = min(cfg.window - 2, int(math.ceil(sample_rate / cfg.f_min)))
    d = _difference_function(x, tau_max + 1)
    dprime = _cmndf(d)

    below = np.flatnonzero(dprime[tau_min:tau_max + 1] < cfg.threshold)
    if below.size == 0:
        return None, 0.0
    tau = tau_min + int(below[0])
    # descend to the local minimum following the threshold crossing
    while tau + 1 <= tau_max and dprime[tau + 1] < dprime[tau]:
        tau += 1

    confidence = float(min(max(1.0 - dprime[tau], 0.0), 1.0))
    # parabolic interpolation on d' around tau for sub-sample lag precision
    refined = float(tau)
    if 1 <= tau < dprime.size - 1:
        a, b, c = dprime[tau - 1], dprime[tau], dprime[tau + 1]
        denom = a - 2.0 * b + c
        if denom > 0.0:
            delta = 0.5 * (a - c) / denom
            refined = tau + float(np.clip(delta, -1.0, 1.0))
    return sample_rate / refined, confidence


def loudness_db(buffer) -> float:
    """20*log10(RMS), clamped to [-120, 0] dBFS."""
    x = np.asarray(buffer, dtype=np.float64).reshape(-1)
    if x.size == 0:
        raise ValueError("loudness_db: empty buffer")
    rms = math.sqrt(float(np.mean(x * x)))
    if rms <= 10.0 ** (LOUDNESS_FLOOR_DB / 20.0):
        return LOUDNESS_FLOOR_DB
    return float(min(max(20.0 * math.log10(rms), LOUDNESS_FLOOR_DB), 0.0))


def midi_to_controls(note: int, velocity: int, pitch_bend: float = 0.0):
    """(f0_hz, loudness_db) for a MIDI note.

    f0 follows equal temperament around A4 = 440 Hz; velocity maps linearly
    in dB over a 60 dB range (127 -> 0 dB, 0 -> -60 dB).
    """
    if not 0 <= int(note) <= 127:
        raise ValueError(f"midi note out of range: {note}")
    if not 0 <= int(velocity) <= 127:
        raise ValueError(f"midi velocity out of range: {velocity}")
    bend = float(np.clip(pitch_bend, -2.0, 2.0))
    f0 = 440.0 * 2.0 ** ((int(note) + bend - 69.0) / 12.0)
    ld = -60.0 * (1.0 - int(velocity) / 127.0)
    return f0, ld
