"""Real-time orchestration.

One audio thread calls process_block once per buffer; any number of control
threads call push_param. Parameter updates land on a bounded queue drained
at buffer start, so a parameter never changes mid-buffer. Expensive
preparation (model loads, reverb IR design) happens on the pushing thread
and is committed by reference swap between buffers, keeping the audio path
free of file I/O, blocking waits and steady-state allocation growth.
"""

from __future__ import annotations

import math
import re
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import timbre
from .additive import RenderScratch, render_harmonics
from .analysis import YinConfig, loudness_db, midi_to_controls, yin_f0
from .controls import (AnalysisFrame, HARMONIC_EDIT_RANGE, INPUT_MODES,
                       LOUDNESS_FLOOR_DB, MacroParams, OscillatorState,
                       PARAM_RANGES)
from .effects import ConvolutionState, LfoState, design_ir, lfo_modulate, \
    mix_master, reverb_process
from .subtractive import NoiseControls, NoiseRngState, render_noise

MAX_BUFFER = 4096
MIN_BUFFER = 32

PARAM_QUEUE_CAPACITY = 256
TELEMETRY_CAPACITY = 16

_EDIT_RE = re.compile(r"^harmonic_edit\[(\d+)\]$")

# Philox stream for reverb IRs, disjoint from the noise stream
_IR_SEED_SALT = 0x49525F53
_IR_REVISION_STRIDE = 1 << 24


@dataclass
class EngineConfig:
    sample_rate: float = 44100.0
    buffer_len: int = 1024
    model_root: str | Path = "models"
    model_name: str = "violin"
    seed: int = 0
    yin: YinConfig = field(default_factory=YinConfig)

    def __post_init__(self):
        b = self.buffer_len
        if b < MIN_BUFFER or b > MAX_BUFFER or b & (b - 1):
            raise ValueError(
                f"buffer_len must be a power of two in [{MIN_BUFFER}, {MAX_BUFFER}]")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")


@dataclass
class ParamUpdate:
    id: str
    value: float | str


@dataclass
class PushResult:
    accepted: bool
    message: str = ""
    value: float | str | None = None


@dataclass
class NoteEvent:
    kind: str  # "on" | "off"
    note: int
    velocity: int = 0


@dataclass
class EngineTelemetry:
    spectrogram_db: np.ndarray
    peak_db: float
    rms_db: float
    f0_hz: float
    utilization: float


def stft_column(buffer, fft_len: int, window: np.ndarray | None = None) -> np.ndarray:
    """Hann-windowed magnitude column in dB, floored at -120.

    Normalized so a full-scale sine at a bin center peaks at 0 dB.
    """
    x = np.asarray(buffer, dtype=np.float64).reshape(-1)
    if fft_len < 2 or fft_len & (fft_len - 1):
        raise ValueError("fft_len must be a power of two >= 2")
    if x.size < fft_len:
        raise ValueError(f"buffer length {x.size} < fft_len {fft_len}")
    if window is None:
        window = hann_window(fft_len)
    mags = np.abs(np.fft.rfft(x[:fft_len] * window)) / (fft_len / 4.0)
    np.maximum(mags, 1e-6, out=mags)  # 1e-6 == -120 dB
    col = 20.0 * np.log10(mags)
    return np.maximum(col, LOUDNESS_FLOOR_DB, out=col)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (zero leakage at exact bin centers)."""
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * np.arange(n) / n)


def _db(value: float) -> float:
    if value <= 1e-6:
        return LOUDNESS_FLOOR_DB
    return max(20.0 * math.log10(value), LOUDNESS_FLOOR_DB)


class Engine:
    """Monophonic synth voice: analysis -> timbre lookup -> synthesis -> fx."""

    def __init__(self, config: EngineConfig):
        self.config = config
        self._model = timbre.load_model(config.model_root, config.model_name)
        self.macro = MacroParams(
            harmonic_edit=np.ones(self._model.harmonics), input_mode="midi")

        sr, buf = config.sample_rate, config.buffer_len
        self._osc = OscillatorState.initial(self._model.harmonics)
        self._scratch = RenderScratch(self._model.harmonics, buf)
        self._noise_rng = NoiseRngState(config.seed, 0)
        self._lfo = LfoState()
        self._ir_revision = 0
        self._conv = self._build_reverb(self.macro.reverb_size,
                                        self.macro.reverb_glow)

        self._params = deque()
        self.telemetry = deque(maxlen=TELEMETRY_CAPACITY)
        self.blocks_processed = 0
        self.live_host = None  # set by server.LiveHost when running live

        self._held: list[tuple[int, int]] = []  # (note, velocity), newest last
        self._last_f0 = 440.0
        self._was_voiced = False
        self._pitch_bend = 0.0

        self._line_history = np.zeros(config.yin.window)
        self._window = hann_window(buf)
        self._pre = np.empty(buf)
        self._zeros = np.zeros(buf)
        self._buffer_period = buf / sr

    # -- control surface -------------------------------------------------

    def param_descriptors(self) -> list[dict]:
        """Self-describing parameter table for the hello protocol."""
        out = []
        for name, (lo, hi, default) in PARAM_RANGES.items():
            out.append({"id": name, "min": lo, "max": hi,
                        "default": default, "kind": "knob"})
        lo, hi, default = HARMONIC_EDIT_RANGE
        out.append({"id": "harmonic_edit", "min": lo, "max": hi,
                    "default": default, "kind": "multislider",
                    "count": self._model.harmonics})
        out.append({"id": "input_mode", "min": 0, "max": 1, "default": 0,
                    "kind": "selector", "options": list(INPUT_MODES)})
        out.append({"id": "model", "min": 0, "max": 0,
                    "default": self._model.name, "kind": "selector",
                    "options": self.model_names()})
        return out

    def model_names(self) -> list[str]:
        return [name for name, _m, err in timbre.list_models(self.config.model_root)
                if err is None]

    def param_value(self, param_id: str):
        match = _EDIT_RE.match(param_id)
        if match:
            idx = int(match.group(1))
            edit = self.macro.harmonic_edit
            return float(edit[idx]) if idx < edit.shape[0] else None
        if param_id == "input_mode":
            return self.macro.input_mode
        if param_id == "model":
            return self._model.name
        if param_id in PARAM_RANGES:
            return float(getattr(self.macro, param_id))
        return None

    def push_param(self, update: ParamUpdate) -> PushResult:
        """Validate, clamp and enqueue an update; applied at next block start.

        Model selection and reverb geometry changes are prepared here, on
        the calling (control) thread, and committed by reference swap.
        """
        if len(self._params) >= PARAM_QUEUE_CAPACITY:
            return PushResult(False, "parameter queue full, update dropped")
        pid = update.id

        if pid == "model":
            try:
                bundle = self._prepare_model(str(update.value))
            except timbre.ModelError as exc:
                return PushResult(False, f"model load failed: {exc}")
            self._params.append(("model", bundle))
            return PushResult(True, value=str(update.value))

        if pid == "input_mode":
            mode = str(update.value)
            if mode not in INPUT_MODES:
                return PushResult(False, f"unknown input mode: {mode}")
            self._params.append(("input_mode", mode))
            return PushResult(True, value=mode)

        match = _EDIT_RE.match(pid)
        if match:
            idx = int(match.group(1))
            if idx >= self._model.harmonics:
                return PushResult(False, f"harmonic index {idx} out of range")
            lo, hi, _ = HARMONIC_EDIT_RANGE
            value = float(np.clip(_safe_float(update.value), lo, hi))
            self._params.append((("harmonic_edit", idx), value))
            return PushResult(True, value=value)

        if pid in PARAM_RANGES:
            lo, hi, _ = PARAM_RANGES[pid]
            value = float(np.clip(_safe_float(update.value), lo, hi))
            if pid in ("reverb_size", "reverb_glow"):
                conv = self._prepare_reverb_for(pid, value)
                self._params.append((("reverb", pid), (value, conv)))
            else:
                self._params.append((pid, value))
            return PushResult(True, value=value)

        return PushResult(False, f"unknown parameter: {pid}")

    # -- preparation off the audio path -----------------------------------

    def _prepare_model(self, name: str):
        model = timbre.load_model(self.config.model_root, name)
        return {
            "model": model,
            "osc": OscillatorState.initial(model.harmonics),
            "scratch": RenderScratch(model.harmonics, self.config.buffer_len),
            "edit": np.ones(model.harmonics),
        }

    def _build_reverb(self, size: float, glow: float) -> ConvolutionState:
        rng = NoiseRngState(self.config.seed ^ _IR_SEED_SALT,
                            self._ir_revision * _IR_REVISION_STRIDE)
        ir = design_ir(size, glow, self.config.sample_rate, rng)
        return ConvolutionState(ir, self.config.buffer_len)

    def _prepare_reverb_for(self, pid: str, value: float) -> ConvolutionState:
        size = value if pid == "reverb_size" else self.macro.reverb_size
        glow = value if pid == "reverb_glow" else self.macro.reverb_glow
        self._ir_revision += 1
        return self._build_reverb(size, glow)

    def _drain_params(self) -> None:
        for _ in range(PARAM_QUEUE_CAPACITY + 8):
            try:
                key, value = self._params.popleft()
            except IndexError:
                return
            if key == "model":
                self._model = value["model"]
                self._osc = value["osc"]
                self._scratch = value["scratch"]
                self.macro.harmonic_edit = value["edit"]
            elif key == "input_mode":
                self.macro.input_mode = value
            elif isinstance(key, tuple) and key[0] == "harmonic_edit":
                self.macro.harmonic_edit[key[1]] = value
            elif isinstance(key, tuple) and key[0] == "reverb":
                applied, conv = value
                setattr(self.macro, key[1], applied)
                self._conv = conv
            else:
                setattr(self.macro, key, value)

    # -- audio path -------------------------------------------------------

    def _apply_midi(self, events) -> None:
        for ev in events:
            if ev.kind == "on":
                self._held = [h for h in self._held if h[0] != ev.note]
                self._held.append((ev.note, ev.velocity))
                self._lfo = LfoState()  # re-arm modulation onset per note
            elif ev.kind == "off":
                self._held = [h for h in self._held if h[0] != ev.note]
            elif ev.kind == "bend":
                self._pitch_bend = float(np.clip(ev.velocity, -2.0, 2.0))

    def _analyze(self, line_in) -> AnalysisFrame:
        """One AnalysisFrame per buffer, from MIDI state or line input."""
        if self.macro.input_mode == "midi":
            if not self._held:
                return AnalysisFrame(0.0, False, 0.0, LOUDNESS_FLOOR_DB)
            note, velocity = self._held[-1]
            f0, ld = midi_to_controls(note, velocity, self._pitch_bend)
            return AnalysisFrame(f0, True, 1.0, ld)
        if line_in is None:
            return AnalysisFrame(0.0, False, 0.0, LOUDNESS_FLOOR_DB)
        x = np.asarray(line_in, dtype=np.float64).reshape(-1)
        if x.size != self.config.buffer_len:
            raise ValueError("line_in length must equal buffer_len")
        hist = self._line_history
        if x.size >= hist.size:
            hist[:] = x[-hist.size:]
        else:
            hist[:-x.size] = hist[x.size:]
            hist[-x.size:] = x
        ld = loudness_db(x)
        f0, confidence = yin_f0(hist, self.config.sample_rate, self.config.yin)
        if f0 is None:
            return AnalysisFrame(0.0, False, 0.0, ld)
        return AnalysisFrame(f0, True, confidence, ld)

    def process_block(self, line_in, midi_events, out) -> EngineTelemetry:
        """Render one buffer into out (buffer_len x 2); returns telemetry."""
        started = time.perf_counter()
        if out.shape != (self.config.buffer_len, 2):
            raise ValueError(
                f"out must have shape ({self.config.buffer_len}, 2), got {out.shape}")

        self._drain_params()
        if self.macro.input_mode == "midi":
            self._apply_midi(midi_events or ())

        analysis = self._analyze(line_in)
        voiced = analysis.voiced
        if voiced:
            if not self._was_voiced and self.macro.input_mode == "line":
                self._lfo = LfoState()  # voiced onset == note start
            self._last_f0 = analysis.f0_hz
        self._was_voiced = voiced

        frame = timbre.lookup(self._model, self._last_f0, analysis.loudness_db)
        if not voiced:
            frame = frame.gated()

        macro = self.macro
        sr, buf = self.config.sample_rate, self.config.buffer_len

        harm, self._osc = render_harmonics(
            frame, macro, self._osc, buf, sr, self._scratch)
        noise_controls = NoiseControls(
            frame.noise_magnitudes, macro.noise_color_alpha,
            macro.noise_gain if voiced else 0.0)
        noise, self._noise_rng = render_noise(
            noise_controls, buf, self._noise_rng, sr)

        np.add(harm, noise, out=self._pre)
        modulated, self._lfo = lfo_modulate(
            self._pre, self._lfo, macro.mod_rate, macro.mod_amount,
            macro.mod_delay, sr)
        reverbed, _ = reverb_process(modulated, self._conv, macro.reverb_mix)
        mono = mix_master(reverbed, self._zeros, macro.master_gain)

        out[:, 0] = mono
        out[:, 1] = mono

        rms = math.sqrt(float(np.mean(mono * mono)))
        peak = float(np.max(np.abs(mono)))
        telemetry = EngineTelemetry(
            spectrogram_db=stft_column(mono, buf, self._window),
            peak_db=_db(peak),
            rms_db=_db(rms),
            f0_hz=self._last_f0 if voiced else 0.0,
            utilization=(time.perf_counter() - started) / self._buffer_period,
        )
        self.telemetry.append(telemetry)
        self.blocks_processed += 1
        return telemetry


def _safe_float(value) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        return 0.0
    return x if math.isfinite(x) else 0.0
