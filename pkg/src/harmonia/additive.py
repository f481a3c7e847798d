"""Harmonic oscillator bank.

Renders one buffer of audio from a ControlFrame by summing K sinusoids at
(stretched, shifted) harmonics of f0, with per-sample linear ramps from the
previous buffer's frequency/amplitude targets and accumulated phases carried
across buffers so concatenated renders are free of phase jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controls import ControlFrame, MacroParams, OscillatorState, TWO_PI

MAX_BUFFER = 4096

_LN10 = math.log(10.0)


def scale_amplitude(raw):
    """Map unbounded decoder output to a positive linear amplitude.

    2 * sigmoid(raw)^ln(10) + 1e-7: strictly increasing with range
    (1e-7, 2 + 1e-7). Accepts scalars or arrays.
    """
    raw = np.asarray(raw, dtype=np.float64)
    sig = 0.5 * (1.0 + np.tanh(0.5 * raw))  # numerically stable sigmoid
    out = 2.0 * sig ** _LN10 + 1e-7
    return float(out) if out.ndim == 0 else out


def harmonic_frequencies(f0: float, num_harmonics: int,
                         stretch: float = 0.0, shift: float = 0.0) -> np.ndarray:
    """Per-harmonic frequencies f_k = f0 * 2^shift * (1 + (k-1)(1+stretch)).

    stretch = shift = 0 reduces to integer multiples k * f0; the fundamental
    stays at f0 * 2^shift for every stretch.
    """
    f_base = max(float(f0), 0.0) * 2.0 ** float(shift)
    k = np.arange(num_harmonics, dtype=np.float64)
    return f_base * (1.0 + k * (1.0 + float(stretch)))


def bandlimit_normalize(weights, freqs, sample_rate: float) -> np.ndarray:
    """Zero weights at/above Nyquist, then scale survivors to unit sum.

    All-zero input (or everything above Nyquist) comes back all-zero.
    """
    w = np.array(weights, dtype=np.float64, copy=True).reshape(-1)
    f = np.asarray(freqs, dtype=np.float64).reshape(-1)
    if w.shape != f.shape:
        raise ValueError("weights and freqs must have equal length")
    w[f >= sample_rate / 2.0] = 0.0
    total = w.sum()
    if total > 0.0:
        w /= total
    return w


@dataclass
class HarmonicPlan:
    """Target per-harmonic frequencies and linear amplitudes for one buffer."""

    freqs: np.ndarray
    amps: np.ndarray


def plan_harmonics(frame: ControlFrame, macro: MacroParams,
                   sample_rate: float) -> HarmonicPlan:
    """Resolve a frame + macros into bandlimited per-harmonic targets.

    A_k = amplitude * c_k * harmonic_edit[k] * harmonic_gain, with c_k the
    bandlimit-normalized distribution; user edits apply after normalization
    so they are not renormalized away.
    """
    k = frame.num_harmonics
    edit = macro.harmonic_edit
    if edit.shape[0] != k:
        raise ValueError(
            f"harmonic_edit length {edit.shape[0]} does not match K={k}")
    freqs = harmonic_frequencies(frame.f0_hz, k, macro.stretch, macro.shift)
    c = bandlimit_normalize(frame.harmonic_distribution, freqs, sample_rate)
    amps = frame.amplitude * macro.harmonic_gain * c * edit
    return HarmonicPlan(freqs=freqs, amps=amps)


class RenderScratch:
    """Preallocated audio-rate work buffers for render_harmonics.

    Owned by the caller (one per engine voice); sized for a harmonic count
    and a maximum buffer length. With a scratch supplied, the render's
    audio-rate arrays all live here and the returned buffer aliases
    scratch.out (copy it if it must outlive the next render).
    """

    def __init__(self, num_harmonics: int, max_len: int = MAX_BUFFER):
        self.num_harmonics = num_harmonics
        self.max_len = max_len
        self.matrix = np.empty((num_harmonics, max_len))
        self.amp_matrix = np.empty((num_harmonics, max_len))
        self.ramp = np.empty(max_len)
        self._ramp_len = 0
        self.out = np.empty(max_len)
        self.start_f = np.empty(num_harmonics)
        self.col = np.empty((num_harmonics, 1))
        self.mask = np.empty(num_harmonics, dtype=bool)

    def fits(self, num_harmonics: int, buffer_len: int) -> bool:
        return (num_harmonics == self.num_harmonics
                and buffer_len <= self.max_len)

    def ramp_for(self, buffer_len: int) -> np.ndarray:
        """(n+1)/L for n in 0..L-1, cached so steady-state calls skip it."""
        view = self.ramp[:buffer_len]
        if self._ramp_len != buffer_len:
            view[:] = np.arange(1, buffer_len + 1, dtype=np.float64)
            view *= 1.0 / buffer_len
            self._ramp_len = buffer_len
        return view


def render_harmonics(frame: ControlFrame, macro: MacroParams,
                     state: OscillatorState, buffer_len: int,
                     sample_rate: float,
                     scratch: RenderScratch | None = None):
    """One buffer of the oscillator bank; returns (mono buffer, new state).

    Frequencies and amplitudes ramp linearly from the previous buffer's
    final values to this frame's targets; phases accumulate as
    phi_k(n) = phi_k(n-1) + 2*pi*f_k(n)/sample_rate (increment applied
    before each sample is evaluated) and are wrapped mod 2*pi in the
    returned state. Harmonics whose previous frequency is 0 (first buffer,
    or attack after silence) start at the target frequency outright, so only
    amplitude ramps shape the attack.
    """
    if buffer_len < 1 or buffer_len > MAX_BUFFER:
        raise ValueError(f"buffer_len must be in [1, {MAX_BUFFER}]")
    k = frame.num_harmonics
    if state.num_harmonics != k:
        raise ValueError(
            f"oscillator state has {state.num_harmonics} harmonics, frame has {k}")
    plan = plan_harmonics(frame, macro, sample_rate)

    if scratch is None:
        scratch = RenderScratch(k, buffer_len)
    elif not scratch.fits(k, buffer_len):
        raise ValueError("scratch does not fit this harmonic count/buffer length")
    mat = scratch.matrix[:, :buffer_len]
    amp = scratch.amp_matrix[:, :buffer_len]
    out = scratch.out[:buffer_len]
    start_f = scratch.start_f
    col = scratch.col

    # ramp hits the target exactly on the final sample
    ramp = scratch.ramp_for(buffer_len)

    np.copyto(start_f, state.prev_f)
    np.less_equal(start_f, 0.0, out=scratch.mask)
    np.copyto(start_f, plan.freqs, where=scratch.mask)

    # frequency ramp -> phase increments -> accumulated phase
    np.subtract(plan.freqs, start_f, out=col[:, 0])
    np.multiply(col, ramp, out=mat)
    np.add(mat, start_f[:, None], out=mat)
    np.multiply(mat, TWO_PI / sample_rate, out=mat)
    np.cumsum(mat, axis=1, out=mat)
    np.add(mat, state.phases[:, None], out=mat)

    new_phases = np.mod(mat[:, -1], TWO_PI)

    # amplitude ramp
    np.subtract(plan.amps, state.prev_amp, out=col[:, 0])
    np.multiply(col, ramp, out=amp)
    np.add(amp, state.prev_amp[:, None], out=amp)

    np.sin(mat, out=mat)
    np.multiply(mat, amp, out=mat)
    np.sum(mat, axis=0, out=out)

    new_state = OscillatorState(new_phases, plan.freqs.copy(), plan.amps.copy())
    return out, new_state
