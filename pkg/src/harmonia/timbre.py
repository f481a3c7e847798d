"""Timbre models: named grids of synthesis controls loaded from disk.

A model is a (pitch x loudness) grid of control frames; lookup bilinearly
interpolates between the four surrounding grid points, standing in for a
trained decoder that maps (f0, loudness) to synthesizer controls. Also
provides playback of precomputed frame sequences.

model.json format (UTF-8 JSON, unknown keys ignored):
  {
    "format_version": 1,
    "name": str,
    "harmonics": K,
    "noise_bins": N,
    "pitch_grid": [MIDI floats, ascending],
    "loudness_grid": [dB floats, ascending],
    "frames": P rows x L entries of {"amplitude": f, "harmonics": [K], "noise": [N]},
    "metadata": {str: str}
  }
Harmonic vectors are relative weights; they are normalized to unit sum on
load. A frame-sequence file carries the same header plus "frame_rate" and a
flat "frames" list whose entries may also carry "f0".
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controls import ControlFrame, sanitize_vector

FORMAT_VERSION = 1


class ModelError(Exception):
    """Raised for missing, unparseable or invariant-violating model files."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field


def _renormalize(weights: np.ndarray) -> np.ndarray:
    """Scale to unit sum; a no-op (bit-identical) when already unit-sum.

    The tolerance gate keeps normalization idempotent across float
    round-trips: load -> save -> load must not drift by an ulp per cycle.
    """
    total = weights.sum()
    if total <= 0.0 or abs(total - 1.0) < 1e-9:
        return weights
    return weights / total


@dataclass
class TimbreModel:
    """Immutable after load; lookup is a pure read, safe to share."""

    name: str
    harmonics: int
    noise_bins: int
    pitch_grid: np.ndarray
    loudness_grid: np.ndarray
    amplitude: np.ndarray          # (P, L)
    harmonic_frames: np.ndarray    # (P, L, K), rows normalized to unit sum
    noise_frames: np.ndarray       # (P, L, N)
    metadata: dict = field(default_factory=dict)

    @property
    def grid_shape(self) -> tuple[int, int]:
        return (int(self.pitch_grid.size), int(self.loudness_grid.size))

    def frame_at(self, pitch_index: int, loudness_index: int) -> ControlFrame:
        """The stored frame at a grid node (f0 left at 0)."""
        return ControlFrame(
            0.0,
            float(self.amplitude[pitch_index, loudness_index]),
            self.harmonic_frames[pitch_index, loudness_index].copy(),
            self.noise_frames[pitch_index, loudness_index].copy(),
        )


def _require(payload: dict, key: str, kind, field: str | None = None):
    field = field or key
    if key not in payload:
        raise ModelError(f"missing required key '{field}'", field)
    value = payload[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ModelError(f"key '{field}' has wrong type", field)
    return value


def _ascending_grid(payload: dict, key: str) -> np.ndarray:
    raw = _require(payload, key, list)
    if len(raw) < 2:
        raise ModelError(f"'{key}' needs at least 2 entries", key)
    grid = np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(grid)):
        raise ModelError(f"'{key}' contains non-finite values", key)
    if not np.all(np.diff(grid) > 0):
        raise ModelError(f"'{key}' must be strictly ascending", key)
    return grid


def _parse_cell(cell, k: int, n: int, where: str):
    if not isinstance(cell, dict):
        raise ModelError(f"{where} is not an object", where)
    amp = cell.get("amplitude")
    if not isinstance(amp, (int, float)) or not math.isfinite(amp) or amp < 0:
        raise ModelError(f"{where}.amplitude must be a finite number >= 0",
                         f"{where}.amplitude")
    harm = cell.get("harmonics")
    if not isinstance(harm, list) or len(harm) != k:
        raise ModelError(f"{where}.harmonics must hold {k} values",
                         f"{where}.harmonics")
    noise = cell.get("noise")
    if not isinstance(noise, list) or len(noise) != n:
        raise ModelError(f"{where}.noise must hold {n} values", f"{where}.noise")
    return (float(amp),
            sanitize_vector(harm, k, f"{where}.harmonics"),
            sanitize_vector(noise, n, f"{where}.noise"))


def parse_model(payload: dict, fallback_name: str = "") -> TimbreModel:
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported format_version {version!r}", "format_version")
    name = payload.get("name", fallback_name)
    if not isinstance(name, str) or not name:
        raise ModelError("'name' must be a non-empty string", "name")
    k = _require(payload, "harmonics", int)
    n = _require(payload, "noise_bins", int)
    if k < 1 or n < 2:
        raise ModelError("need harmonics >= 1 and noise_bins >= 2",
                         "harmonics" if k < 1 else "noise_bins")
    pitch_grid = _ascending_grid(payload, "pitch_grid")
    loudness_grid = _ascending_grid(payload, "loudness_grid")
    p, l = pitch_grid.size, loudness_grid.size

    rows = _require(payload, "frames", list)
    if len(rows) != p:
        raise ModelError(f"frames has {len(rows)} rows, expected {p} pitch rows",
                         "frames")
    amplitude = np.zeros((p, l))
    harmonic_frames = np.zeros((p, l, k))
    noise_frames = np.zeros((p, l, n))
    for pi, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != l:
            have = len(row) if isinstance(row, list) else 0
            missing_l = min(have, l - 1)
            raise ModelError(
                f"frames[{pi}] holds {have} cells, expected {l}: cell "
                f"(pitch={pitch_grid[pi]:g}, loudness={loudness_grid[missing_l]:g})"
                " missing or extra",
                f"frames[{pi}][{missing_l}]")
        for li, cell in enumerate(row):
            where = f"frames[{pi}][{li}]"
            amp, harm, noise = _parse_cell(cell, k, n, where)
            harm = _renormalize(harm)
            amplitude[pi, li] = amp
            harmonic_frames[pi, li] = harm
            noise_frames[pi, li] = noise

    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ModelError("'metadata' must be an object", "metadata")
    return TimbreModel(name, k, n, pitch_grid, loudness_grid,
                       amplitude, harmonic_frames, noise_frames,
                       {str(mk): str(mv) for mk, mv in metadata.items()})


def load_model(root_path, name: str) -> TimbreModel:
    """Load and validate root_path/name/model.json."""
    path = Path(root_path) / name / "model.json"
    if not path.is_file():
        raise ModelError(f"model file not found: {path}", "path")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot parse {path}: {exc}", "json") from exc
    if not isinstance(payload, dict):
        raise ModelError("model.json must hold a JSON object", "json")
    return parse_model(payload, fallback_name=name)


def model_to_payload(model: TimbreModel) -> dict:
    p, l = model.grid_shape
    frames = [[{
        "amplitude": float(model.amplitude[pi, li]),
        "harmonics": model.harmonic_frames[pi, li].tolist(),
        "noise": model.noise_frames[pi, li].tolist(),
    } for li in range(l)] for pi in range(p)]
    return {
        "format_version": FORMAT_VERSION,
        "name": model.name,
        "harmonics": model.harmonics,
        "noise_bins": model.noise_bins,
        "pitch_grid": model.pitch_grid.tolist(),
        "loudness_grid": model.loudness_grid.tolist(),
        "frames": frames,
        "metadata": dict(model.metadata),
    }


def save_model(model: TimbreModel, root_path) -> Path:
    """Write root_path/name/model.json; returns the written path."""
    path = Path(root_path) / model.name / "model.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_payload(model)), encoding="utf-8")
    return path


def list_models(root_path):
    """(name, model-or-None, error-or-None) for every subdirectory with a
    model.json, sorted by name. Invalid models report, they do not abort."""
    root = Path(root_path)
    results = []
    if not root.is_dir():
        return results
    for sub in sorted(root.iterdir()):
        if not (sub / "model.json").is_file():
            continue
        try:
            results.append((sub.name, load_model(root, sub.name), None))
        except ModelError as exc:
            results.append((sub.name, None, exc))
    return results


def _bracket(grid: np.ndarray, value: float):
    """Indices (i0, i1) and blend t for a value clamped into the grid hull."""
    v = float(np.clip(value, grid[0], grid[-1]))
    i1 = int(np.searchsorted(grid, v, side="left"))
    if i1 <= 0:
        return 0, 0, 0.0
    if i1 >= grid.size:
        return grid.size - 1, grid.size - 1, 0.0
    i0 = i1 - 1
    t = (v - grid[i0]) / (grid[i1] - grid[i0])
    return i0, i1, float(t)


def lookup(model: TimbreModel, f0: float, loudness_db: float) -> ControlFrame:
    """Bilinearly interpolated controls for (f0, loudness), hull-clamped.

    The returned frame carries the query f0 and a renormalized harmonic
    distribution, so it always satisfies the additive module's contract.
    """
    if f0 <= 0.0:
        raise ValueError("lookup requires f0 > 0")
    pitch = 69.0 + 12.0 * math.log2(f0 / 440.0)
    p0, p1, tp = _bracket(model.pitch_grid, pitch)
    l0, l1, tl = _bracket(model.loudness_grid, loudness_db)

    w00 = (1.0 - tp) * (1.0 - tl)
    w10 = tp * (1.0 - tl)
    w01 = (1.0 - tp) * tl
    w11 = tp * tl

    def blend(arr):
        return (w00 * arr[p0, l0] + w10 * arr[p1, l0]
                + w01 * arr[p0, l1] + w11 * arr[p1, l1])

    amp = float(blend(model.amplitude))
    harm = _renormalize(blend(model.harmonic_frames))
    noise = blend(model.noise_frames)
    return ControlFrame(f0, amp, harm, noise)


@dataclass
class FrameSequence:
    """Precomputed control frames played back at a fixed rate."""

    frame_rate: float
    frames: list

    def __post_init__(self):
        if self.frame_rate <= 0:
            raise ValueError("frame_rate must be positive")
        if not self.frames:
            raise ValueError("frame sequence must be non-empty")


def sequence_frame(seq: FrameSequence, t: float) -> ControlFrame:
    """Frame at time t: linear interpolation between neighbors, held past
    the end; harmonic distribution renormalized after interpolation."""
    if t < 0:
        raise ValueError("t must be >= 0")
    pos = t * seq.frame_rate
    idx = int(math.floor(pos))
    if idx >= len(seq.frames) - 1:
        last = seq.frames[-1]
        return ControlFrame(last.f0_hz, last.amplitude,
                            last.harmonic_distribution.copy(),
                            last.noise_magnitudes.copy())
    frac = pos - idx
    a, b = seq.frames[idx], seq.frames[idx + 1]
    harm = _renormalize((1.0 - frac) * a.harmonic_distribution
                        + frac * b.harmonic_distribution)
    return ControlFrame(
        (1.0 - frac) * a.f0_hz + frac * b.f0_hz,
        (1.0 - frac) * a.amplitude + frac * b.amplitude,
        harm,
        (1.0 - frac) * a.noise_magnitudes + frac * b.noise_magnitudes,
    )


def load_sequence(path) -> FrameSequence:
    """Parse a frame-sequence file (model header + frame_rate + flat frames)."""
    path = Path(path)
    if not path.is_file():
        raise ModelError(f"sequence file not found: {path}", "path")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot parse {path}: {exc}", "json") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelError(f"unsupported format_version {version!r}", "format_version")
    k = _require(payload, "harmonics", int)
    n = _require(payload, "noise_bins", int)
    rate = float(_require(payload, "frame_rate", (int, float)))
    raw = _require(payload, "frames", list)
    frames = []
    for i, cell in enumerate(raw):
        where = f"frames[{i}]"
        amp, harm, noise = _parse_cell(cell, k, n, where)
        f0 = cell.get("f0", 0.0)
        if not isinstance(f0, (int, float)) or not math.isfinite(f0) or f0 < 0:
            raise ModelError(f"{where}.f0 must be a finite number >= 0",
                             f"{where}.f0")
        frames.append(ControlFrame(float(f0), amp, harm, noise))
    return FrameSequence(rate, frames)
