"""Shared value types for synthesis controls, oscillator state and macros.

Everything here is a plain copyable dataclass; audio-thread code receives
copies or treats instances as read-only. Constructors sanitize: non-finite
numbers become 0 and out-of-range values are clamped, so no NaN/Inf can
propagate into the audio path.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

LOUDNESS_FLOOR_DB = -120.0

DEFAULT_HARMONICS = 60
DEFAULT_NOISE_BINS = 65

INPUT_MODES = ("midi", "line")

# id -> (min, max, default) for every scalar macro parameter. The control
# server derives its hello payload from this table; clamping uses it too.
PARAM_RANGES: dict[str, tuple[float, float, float]] = {
    "stretch": (-1.0, 1.0, 0.0),
    "shift": (-1.0, 1.0, 0.0),
    "harmonic_gain": (0.0, 8.0, 1.0),
    "noise_gain": (0.0, 8.0, 1.0),
    "noise_color_alpha": (0.0, 4.0, 1.0),
    "reverb_mix": (0.0, 1.0, 0.3),
    "reverb_size": (0.01, 2.0, 1.0),
    "reverb_glow": (0.0, 1.0, 0.5),
    "mod_rate": (0.0, 20.0, 5.0),
    "mod_amount": (0.0, 1.0, 0.0),
    "mod_delay": (0.0, 1.0, 0.0),
    "master_gain": (0.0, 4.0, 0.8),
}

HARMONIC_EDIT_RANGE = (0.0, 2.0, 1.0)


def _finite(x: float, default: float = 0.0) -> float:
    x = float(x)
    return x if math.isfinite(x) else default


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(_finite(x, lo), lo), hi)


def sanitize_vector(values, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Float64 copy with NaN/Inf replaced by 0 and negatives clamped to 0."""
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name}: expected length {length}, got {arr.shape[0]}")
    np.nan_to_num(arr, copy=False, nan=0.0, posinf=0.0, neginf=0.0)
    np.maximum(arr, 0.0, out=arr)
    return arr


@dataclass
class ControlFrame:
    """One time step of synthesis controls.

    f0_hz == 0 flags unvoiced. harmonic_distribution holds K relative
    weights (normalization to unit sum happens in the additive module);
    noise_magnitudes holds N linear filter magnitudes from DC to Nyquist.
    """

    f0_hz: float
    amplitude: float
    harmonic_distribution: np.ndarray
    noise_magnitudes: np.ndarray

    def __post_init__(self):
        self.f0_hz = max(_finite(self.f0_hz), 0.0)
        self.amplitude = max(_finite(self.amplitude), 0.0)
        self.harmonic_distribution = sanitize_vector(
            self.harmonic_distribution, name="harmonic_distribution")
        self.noise_magnitudes = sanitize_vector(
            self.noise_magnitudes, name="noise_magnitudes")

    @property
    def num_harmonics(self) -> int:
        return int(self.harmonic_distribution.shape[0])

    @property
    def num_noise_bins(self) -> int:
        return int(self.noise_magnitudes.shape[0])

    def gated(self) -> "ControlFrame":
        """Copy with amplitude forced to zero (unvoiced / no active note)."""
        return ControlFrame(self.f0_hz, 0.0,
                            self.harmonic_distribution, self.noise_magnitudes)


TWO_PI = 2.0 * math.pi


@dataclass
class OscillatorState:
    """Per-harmonic accumulated phases and previous-buffer ramp anchors."""

    phases: np.ndarray
    prev_f: np.ndarray
    prev_amp: np.ndarray

    def __post_init__(self):
        self.phases = np.mod(np.asarray(self.phases, dtype=np.float64), TWO_PI)
        self.prev_f = np.asarray(self.prev_f, dtype=np.float64)
        self.prev_amp = np.asarray(self.prev_amp, dtype=np.float64)
        k = self.phases.shape[0]
        if self.prev_f.shape[0] != k or self.prev_amp.shape[0] != k:
            raise ValueError("oscillator state arrays must share one length")

    @classmethod
    def initial(cls, num_harmonics: int) -> "OscillatorState":
        z = np.zeros(num_harmonics)
        return cls(z.copy(), z.copy(), z.copy())

    @property
    def num_harmonics(self) -> int:
        return int(self.phases.shape[0])


@dataclass
class MacroParams:
    """User macro surface; construction clamps every field into range."""

    stretch: float = 0.0
    shift: float = 0.0
    harmonic_gain: float = 1.0
    noise_gain: float = 1.0
    noise_color_alpha: float = 1.0
    harmonic_edit: np.ndarray = field(
        default_factory=lambda: np.ones(DEFAULT_HARMONICS))
    reverb_mix: float = 0.3
    reverb_size: float = 1.0
    reverb_glow: float = 0.5
    mod_rate: float = 5.0
    mod_amount: float = 0.0
    mod_delay: float = 0.0
    master_gain: float = 0.8
    input_mode: str = "midi"

    def __post_init__(self):
        for name, (lo, hi, _default) in PARAM_RANGES.items():
            setattr(self, name, _clamp(getattr(self, name), lo, hi))
        lo, hi, _ = HARMONIC_EDIT_RANGE
        edit = np.array(self.harmonic_edit, dtype=np.float64, copy=True).reshape(-1)
        np.nan_to_num(edit, copy=False, nan=lo, posinf=hi, neginf=lo)
        np.clip(edit, lo, hi, out=edit)
        self.harmonic_edit = edit
        if self.input_mode not in INPUT_MODES:
            self.input_mode = "midi"


def clamp_macro(params: MacroParams) -> MacroParams:
    """Clamped copy of params. Total and idempotent."""
    return dataclasses.replace(params)


@dataclass
class AnalysisFrame:
    """Per-buffer pitch/loudness analysis result."""

    f0_hz: float
    voiced: bool
    confidence: float
    loudness_db: float

    def __post_init__(self):
        self.f0_hz = max(_finite(self.f0_hz), 0.0)
        if not self.voiced:
            self.confidence = 0.0
            self.f0_hz = 0.0
        self.confidence = _clamp(self.confidence, 0.0, 1.0)
        self.loudness_db = _clamp(self.loudness_db, LOUDNESS_FLOOR_DB, 0.0)
