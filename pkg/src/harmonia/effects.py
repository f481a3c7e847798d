"""Post-synthesis chain: convolution reverb, amplitude LFO, mix/master.

The reverb is a uniformly partitioned frequency-domain convolution with the
partition size equal to the engine buffer size, so arbitrarily long impulse
responses (up to 2 s) run with no added latency and match direct
time-domain convolution to float precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .subtractive import NoiseRngState

MAX_IR_SECONDS = 2.0

GLOW_CUTOFF_LO_HZ = 1000.0
GLOW_CUTOFF_HI_HZ = 12000.0


@dataclass
class ImpulseResponse:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if self.samples.size < 1:
            raise ValueError("impulse response must have at least one sample")
        if self.samples.size > MAX_IR_SECONDS * self.sample_rate:
            raise ValueError("impulse response longer than 2 seconds")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("impulse response contains non-finite values")


def design_ir(size: float, glow: float, sample_rate: float,
              rng: NoiseRngState) -> ImpulseResponse:
    """Synthesize a reverb impulse response from the size/glow knobs.

    Exponentially decaying noise reaching -60 dB at t = size; glow sets the
    cutoff of a one-pole low-pass that falls across the tail so late
    reflections darken, with per-sample gain compensation so the -60 dB
    decay law is untouched. ir[0] is zeroed (the dry path carries the direct
    sound) and the result is normalized to unit energy.
    """
    if not 0.0 < size <= MAX_IR_SECONDS:
        raise ValueError(f"reverb size must be in (0, {MAX_IR_SECONDS}] seconds")
    glow = float(np.clip(glow, 0.0, 1.0))
    length = max(int(round(size * sample_rate)), 8)

    warmup = 2048  # settles the filter so the t=0 envelope is unbiased
    noise = rng.generator().uniform(-1.0, 1.0, warmup + length)

    cutoff0 = GLOW_CUTOFF_LO_HZ + glow * (GLOW_CUTOFF_HI_HZ - GLOW_CUTOFF_LO_HZ)
    cutoffs = np.concatenate([
        np.full(warmup, cutoff0),
        np.linspace(cutoff0, 0.25 * cutoff0, length),
    ])
    poles = np.exp(-2.0 * math.pi * cutoffs / sample_rate)
    comp = np.sqrt((1.0 - poles) / (1.0 + poles))  # stationary RMS gain

    filtered = np.empty(warmup + length)
    y = 0.0
    for n in range(warmup + length):
        p = poles[n]
        y = (1.0 - p) * noise[n] + p * y
        filtered[n] = y / comp[n]

    tau = size / 6.91  # exp(-6.91) ~ -60 dB
    envelope = np.exp(-np.arange(length) / (tau * sample_rate))
    ir = filtered[warmup:] * envelope
    ir[0] = 0.0
    energy = float(np.sum(ir * ir))
    if energy > 0.0:
        ir /= math.sqrt(energy)
    return ImpulseResponse(ir, sample_rate)


class ConvolutionState:
    """Partitioned-IR spectra plus the frequency-domain delay line.

    Partition size B equals the processing buffer size; each block performs
    one length-2B real FFT, P complex multiply-accumulates and one inverse
    FFT (overlap-save, so only the last B output samples are kept).
    """

    def __init__(self, ir: ImpulseResponse, block_size: int):
        if block_size < 1:
            raise ValueError("block size must be positive")
        taps = ir.samples
        self.block_size = block_size
        self.partitions = max(1, -(-taps.size // block_size))
        padded = np.zeros(self.partitions * block_size)
        padded[:taps.size] = taps
        blocks = padded.reshape(self.partitions, block_size)
        self.ir_spectra = np.fft.rfft(blocks, n=2 * block_size, axis=1)
        self.delay_line = np.zeros_like(self.ir_spectra)
        self.prev_input = np.zeros(block_size)

    def copy(self) -> "ConvolutionState":
        dup = object.__new__(ConvolutionState)
        dup.block_size = self.block_size
        dup.partitions = self.partitions
        dup.ir_spectra = self.ir_spectra  # immutable after init, share
        dup.delay_line = self.delay_line.copy()
        dup.prev_input = self.prev_input.copy()
        return dup


def reverb_process(dry, state: ConvolutionState, mix: float):
    """(1-mix)*dry + mix*(dry convolved with the IR); returns (out, state).

    The state is advanced in place and returned; use state.copy() to fork.
    Output matches direct time-domain convolution of the full input history
    to within float tolerance.
    """
    if state is None:
        raise ValueError("reverb state is uninitialized (no impulse response)")
    x = np.asarray(dry, dtype=np.float64).reshape(-1)
    if x.size != state.block_size:
        raise ValueError(
            f"buffer length {x.size} != partition size {state.block_size}")
    mix = float(np.clip(mix, 0.0, 1.0))

    window = np.concatenate([state.prev_input, x])
    spectrum = np.fft.rfft(window)
    state.delay_line[1:] = state.delay_line[:-1]
    state.delay_line[0] = spectrum
    wet_spec = np.einsum("ij,ij->j", state.ir_spectra, state.delay_line)
    wet = np.fft.irfft(wet_spec, n=2 * state.block_size)[state.block_size:]
    state.prev_input[:] = x

    out = (1.0 - mix) * x + mix * wet
    return out, state


@dataclass
class LfoState:
    """Amplitude-LFO phase plus the delayed-start countdown.

    countdown is None until the first processed buffer arms it from the
    delay knob; the engine resets the state at note-on so modulation onset
    is per note.
    """

    phase: float = 0.0
    countdown: int | None = None


def lfo_modulate(buffer, state: LfoState, rate: float, amount: float,
                 delay: float, sample_rate: float):
    """Amplitude modulation out[n] = in[n] * (1 - amount*(0.5 - 0.5*cos(phi))).

    Modulation starts after delay*2 seconds of countdown; amount = 0 passes
    the input through bit-exactly. Returns (buffer, new state).
    """
    x = np.asarray(buffer, dtype=np.float64).reshape(-1)
    out = x.copy()
    countdown = state.countdown
    if countdown is None:
        countdown = int(round(np.clip(delay, 0.0, 1.0) * 2.0 * sample_rate))

    remaining = max(countdown - x.size, 0)
    if amount <= 0.0:
        return out, LfoState(state.phase, remaining)

    skip = min(countdown, x.size)
    active = x.size - skip
    phase = state.phase
    if active > 0:
        steps = np.arange(1, active + 1, dtype=np.float64)
        phi = phase + (2.0 * math.pi * rate / sample_rate) * steps
        out[skip:] *= 1.0 - amount * (0.5 - 0.5 * np.cos(phi))
        phase = float(np.mod(phi[-1], 2.0 * math.pi))
    return out, LfoState(phase, remaining)


def mix_master(harmonic, noise, master_gain: float) -> np.ndarray:
    """master_gain * (harmonic + noise), hard-clipped to [-1, 1]."""
    h = np.asarray(harmonic, dtype=np.float64).reshape(-1)
    n = np.asarray(noise, dtype=np.float64).reshape(-1)
    if h.size != n.size:
        raise ValueError(f"length mismatch: {h.size} vs {n.size}")
    out = master_gain * (h + n)
    return np.clip(out, -1.0, 1.0, out=out)
