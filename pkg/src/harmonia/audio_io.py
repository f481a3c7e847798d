"""WAV read/write and the MIDI-like event-script format.

WAV support covers PCM 16/24/32-bit and float32/float64; stereo input is
downmixed by averaging. Writes are 16-bit PCM or 32-bit float. The event
script is a CSV of rows `time_s,event,note,velocity` with event in
{note_on, note_off}, giving deterministic offline reproduction of MIDI
performances without a MIDI-file dependency.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .engine import NoteEvent


def read_wav(path):
    """(mono float64 samples in [-1, 1], sample_rate)."""
    try:
        rate, data = wavfile.read(str(path))
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"cannot read WAV {path}: {exc}") from exc
    if data.ndim == 2:
        data = data.mean(axis=1)
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format: {data.dtype}")
    return np.asarray(samples, dtype=np.float64), int(rate)


def write_wav(path, samples, sample_rate: int, bit_depth: str = "float32"):
    """Write mono or stereo samples; bit_depth is 'int16' or 'float32'."""
    data = np.asarray(samples, dtype=np.float64)
    if bit_depth == "int16":
        clipped = np.clip(data, -1.0, 1.0)
        payload = (clipped * 32767.0).round().astype(np.int16)
    elif bit_depth == "float32":
        payload = data.astype(np.float32)
    else:
        raise ValueError(f"unsupported bit depth: {bit_depth}")
    wavfile.write(str(path), int(sample_rate), payload)


def parse_event_script(path):
    """[(time_s, NoteEvent)] sorted by time, from the CSV script format."""
    events = []
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(text.splitlines())
    for line_no, row in enumerate(reader, start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        row = [cell.strip() for cell in row]
        if row[0].lower() in ("time", "time_s"):
            continue  # header row
        if len(row) < 3:
            raise ValueError(f"{path}:{line_no}: expected time,event,note[,velocity]")
        try:
            t = float(row[0])
            note = int(row[2])
            velocity = int(row[3]) if len(row) > 3 and row[3] else 0
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from exc
        kind = {"note_on": "on", "on": "on",
                "note_off": "off", "off": "off"}.get(row[1].lower())
        if kind is None:
            raise ValueError(f"{path}:{line_no}: unknown event '{row[1]}'")
        if t < 0:
            raise ValueError(f"{path}:{line_no}: negative time")
        events.append((t, NoteEvent(kind, note, velocity)))
    events.sort(key=lambda pair: pair[0])
    return events
