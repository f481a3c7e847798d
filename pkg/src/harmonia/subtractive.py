"""Filtered-noise synthesis.

Each buffer is a fresh block of deterministic white noise shaped in the
frequency domain: forward real FFT, per-bin multiply by the model's
magnitude response (mapped uniformly DC..Nyquist with linear interpolation)
times a noise-color weight, inverse FFT. Frames are independent; no
overlap-add or windowing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .controls import sanitize_vector

MAX_BUFFER = 4096

COLOR_REF_HZ = 1000.0


@dataclass
class NoiseControls:
    """Magnitude response (m_0 = DC .. m_{N-1} = Nyquist), color, gain."""

    magnitudes: np.ndarray
    alpha: float = 1.0
    gain: float = 1.0

    def __post_init__(self):
        self.magnitudes = sanitize_vector(self.magnitudes, name="magnitudes")
        self.alpha = max(float(self.alpha), 0.0)
        self.gain = max(float(self.gain), 0.0)


@dataclass(frozen=True)
class NoiseRngState:
    """Position in a counter-based random stream; value type, copy to fork.

    seed selects the stream, block is a Philox 4-word counter position, so
    advancing is O(1) and identical states always reproduce identical noise.
    """

    seed: int = 0
    block: int = 0

    def generator(self) -> Generator:
        return Generator(Philox(key=self.seed, counter=[self.block, 0, 0, 0]))

    def advanced(self, num_draws: int) -> "NoiseRngState":
        return NoiseRngState(self.seed, self.block + (num_draws + 3) // 4)


def noise_color_weights(num_bins: int, alpha: float, sample_rate: float) -> np.ndarray:
    """Per-bin color weights for bins spanning DC..Nyquist uniformly.

    weight(f) = (f / 1 kHz)^(1 - alpha): alpha = 1 is flat (white), alpha < 1
    tilts energy up toward high frequencies, alpha > 1 toward lows. The DC
    bin inherits bin 1's weight to avoid a 0^negative singularity.
    """
    if num_bins < 2:
        raise ValueError("num_bins must be >= 2")
    freqs = np.arange(num_bins, dtype=np.float64) * (sample_rate / 2.0) / (num_bins - 1)
    exponent = 1.0 - float(alpha)
    if exponent == 0.0:
        return np.ones(num_bins)
    w = np.empty(num_bins)
    w[1:] = (freqs[1:] / COLOR_REF_HZ) ** exponent
    w[0] = w[1]
    return w


def render_noise(controls: NoiseControls, buffer_len: int,
                 rng: NoiseRngState, sample_rate: float):
    """One buffer of filtered noise; returns (mono buffer, new rng state).

    The N model magnitudes are spread linearly across the buffer_len/2 + 1
    FFT bins; the synthesized buffer is real and bit-reproducible for a
    given (controls, buffer_len, rng) triple.
    """
    if buffer_len < 2 or buffer_len > MAX_BUFFER:
        raise ValueError(f"buffer_len must be in [2, {MAX_BUFFER}]")
    mags = controls.magnitudes
    if mags.shape[0] < 2:
        raise ValueError("need at least two magnitude points")

    noise = rng.generator().uniform(-1.0, 1.0, buffer_len)
    spec = np.fft.rfft(noise)

    num_bins = buffer_len // 2 + 1
    positions = np.linspace(0.0, mags.shape[0] - 1.0, num_bins)
    response = np.interp(positions, np.arange(mags.shape[0]), mags)
    response *= noise_color_weights(num_bins, controls.alpha, sample_rate)

    spec *= response
    out = np.fft.irfft(spec, n=buffer_len)
    if controls.gain != 1.0:
        out *= controls.gain
    return out, rng.advanced(buffer_len)
