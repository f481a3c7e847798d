#!/usr/bin/env python3
"""Record a telemetry fixture for the spectrogram tests.

Renders a 440 Hz note on a single-harmonic model and captures the quantized
spectrogram columns the control server would stream, including the note-off
reverb tail. Output: test/fixtures/telemetry_440.json
"""

import json
import sys
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "src"))
sys.path.insert(0, str(REPO / "tests"))

from conftest import write_model  # noqa: E402
from harmonia.engine import Engine, EngineConfig, NoteEvent, ParamUpdate  # noqa: E402
from harmonia.server import quantize_column  # noqa: E402

import tempfile

BUFFER = 1024
SR = 44100.0


def main() -> int:
    with tempfile.TemporaryDirectory() as tmp:
        write_model(tmp, "mono")
        engine = Engine(EngineConfig(sample_rate=SR, buffer_len=BUFFER,
                                     model_root=tmp, model_name="mono", seed=1))
        engine.push_param(ParamUpdate("reverb_mix", 0.3))
        engine.push_param(ParamUpdate("reverb_size", 0.2))
        out = np.empty((BUFFER, 2))
        columns = []
        engine.process_block(None, [NoteEvent("on", 69, 127)], out)
        columns.append(quantize_column(engine.telemetry[-1].spectrogram_db))
        for _ in range(29):
            engine.process_block(None, [], out)
            columns.append(quantize_column(engine.telemetry[-1].spectrogram_db))
        engine.process_block(None, [NoteEvent("off", 69)], out)
        columns.append(quantize_column(engine.telemetry[-1].spectrogram_db))
        for _ in range(19):
            engine.process_block(None, [], out)
            columns.append(quantize_column(engine.telemetry[-1].spectrogram_db))

    payload = {
        "sample_rate": SR,
        "buffer_len": BUFFER,
        "f0_hz": 440.0,
        "note_off_column": 30,
        "columns": columns,
    }
    target = Path(__file__).resolve().parents[1] / "test" / "fixtures"
    target.mkdir(parents=True, exist_ok=True)
    path = target / "telemetry_440.json"
    path.write_text(json.dumps(payload))
    print(f"wrote {path} ({len(columns)} columns x {len(columns[0])} bins)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
