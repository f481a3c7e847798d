"""Command-line front door: offline rendering, analysis, model inspection
and the live engine with its web control surface.

Exit codes: 0 success, 2 usage, 3 unreadable input, 4 unknown model,
5 unwritable output, 6 device/port unavailable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import timbre
from .analysis import YinConfig, loudness_db, yin_f0
from .audio_io import parse_event_script, read_wav, write_wav
from .engine import Engine, EngineConfig, ParamUpdate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_MODEL = 4
EXIT_OUTPUT = 5
EXIT_DEVICE = 6

DEFAULT_ROOT_ENV = "HARMONIA_MODEL_ROOT"


def _default_root() -> str:
    return os.environ.get(DEFAULT_ROOT_ENV, "models")


def _parse_overrides(pairs):
    overrides = []
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"--set expects key=value, got '{pair}'")
        key, value = pair.split("=", 1)
        overrides.append(ParamUpdate(key.strip(), value.strip()))
    return overrides


def _apply_overrides(engine: Engine, overrides) -> None:
    for update in overrides:
        result = engine.push_param(update)
        if not result.accepted:
            raise ValueError(f"--set {update.id}: {result.message}")


def cmd_render(args) -> int:
    in_path = Path(args.input)
    if not in_path.is_file():
        print(f"error: input not found: {in_path}", file=sys.stderr)
        return EXIT_INPUT

    is_events = in_path.suffix.lower() in (".csv", ".events", ".txt")
    mode = args.mode or ("midi" if is_events else "line")

    try:
        if is_events:
            events = parse_event_script(in_path)
            sample_rate = args.rate
            line_audio = None
        else:
            line_audio, sample_rate = read_wav(in_path)
            events = []
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        config = EngineConfig(sample_rate=sample_rate, buffer_len=args.buffer,
                              model_root=args.root, model_name=args.model,
                              seed=args.seed)
        engine = Engine(config)
        overrides = _parse_overrides(args.set)
        engine.push_param(ParamUpdate("input_mode", mode))
        _apply_overrides(engine, overrides)
    except timbre.ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    buf = config.buffer_len
    if mode == "line":
        if line_audio is None:
            print("error: line mode needs a WAV input", file=sys.stderr)
            return EXIT_INPUT
        total = int(math.ceil(line_audio.size / buf)) * buf
        padded = np.zeros(total)
        padded[:line_audio.size] = line_audio
        blocks = total // buf
        get_line = lambda i: padded[i * buf:(i + 1) * buf]
        get_events = lambda i: []
        out_len = line_audio.size
    else:
        tail = engine.macro.reverb_size + 0.5
        end_time = (max(t for t, _e in events) if events else 0.0) + tail
        blocks = max(int(math.ceil(end_time * sample_rate / buf)), 1)
        by_block: dict[int, list] = {}
        for t, event in events:
            by_block.setdefault(min(int(t * sample_rate) // buf, blocks - 1),
                                []).append(event)
        get_line = lambda i: None
        get_events = lambda i: by_block.get(i, [])
        out_len = blocks * buf

    rendered = np.empty(blocks * buf)
    out = np.empty((buf, 2))
    spectrogram_rows = [] if args.spectrogram else None
    for i in range(blocks):
        telemetry = engine.process_block(get_line(i), get_events(i), out)
        rendered[i * buf:(i + 1) * buf] = out[:, 0]
        if spectrogram_rows is not None:
            spectrogram_rows.append(telemetry.spectrogram_db.copy())

    try:
        write_wav(args.out, rendered[:out_len], int(sample_rate), args.bits)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_OUTPUT

    if spectrogram_rows is not None:
        try:
            np.savetxt(args.spectrogram, np.asarray(spectrogram_rows),
                       fmt="%.2f", delimiter=",")
        except OSError as exc:
            print(f"error: cannot write {args.spectrogram}: {exc}", file=sys.stderr)
            return EXIT_OUTPUT
    print(f"rendered {out_len / sample_rate:.2f} s -> {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    in_path = Path(args.input)
    if not in_path.is_file():
        print(f"error: input not found: {in_path}", file=sys.stderr)
        return EXIT_INPUT
    try:
        audio, sample_rate = read_wav(in_path)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    cfg = YinConfig()
    window = cfg.window
    total = max(int(math.ceil(audio.size / window)), 1) * window
    padded = np.zeros(total)
    padded[:audio.size] = audio

    print("time_s,f0_hz,confidence,loudness_db")
    for i in range(total // window):
        chunk = padded[i * window:(i + 1) * window]
        f0, confidence = yin_f0(chunk, sample_rate, cfg)
        ld = loudness_db(chunk)
        f0_text = f"{f0:.3f}" if f0 is not None else ""
        print(f"{i * window / sample_rate:.4f},{f0_text},{confidence:.3f},{ld:.2f}")
    return EXIT_OK


def cmd_models(args) -> int:
    results = timbre.list_models(args.root)
    if not results:
        print(f"no models found under {args.root}", file=sys.stderr)
        return EXIT_MODEL
    loaded = 0
    for name, model, error in results:
        if model is not None:
            loaded += 1
            p, l = model.grid_shape
            print(f"{name}: K={model.harmonics} N={model.noise_bins} "
                  f"grid={p}x{l} ({p * l} frames)")
        else:
            print(f"{name}: INVALID - {error}", file=sys.stderr)
    return EXIT_OK if loaded else EXIT_MODEL


def cmd_live(args) -> int:
    from . import server  # defer aiohttp import for the offline commands

    try:
        config = EngineConfig(sample_rate=args.rate, buffer_len=args.buffer,
                              model_root=args.root, model_name=args.model,
                              seed=args.seed)
        engine = Engine(config)
    except timbre.ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return server.run_live(engine, host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="harmonia",
        description="Spectral modeling synthesizer: render, analyze, inspect "
                    "models, or run the live engine with its web control surface.")
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="offline render to WAV")
    render.add_argument("--in", dest="input", required=True,
                        help="input WAV (line mode) or event-script CSV (midi mode)")
    render.add_argument("--model", required=True, help="timbre model name")
    render.add_argument("--mode", choices=("line", "midi"), default=None,
                        help="input mode (default: inferred from input type)")
    render.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="macro parameter override, repeatable")
    render.add_argument("--seed", type=int, default=0)
    render.add_argument("--out", required=True, help="output WAV path")
    render.add_argument("--spectrogram", default=None,
                        help="also write the STFT column series as CSV")
    render.add_argument("--root", default=_default_root())
    render.add_argument("--rate", type=float, default=44100.0,
                        help="sample rate for event-script inputs")
    render.add_argument("--buffer", type=int, default=1024)
    render.add_argument("--bits", choices=("int16", "float32"), default="float32")
    render.set_defaults(func=cmd_render)

    analyze = sub.add_parser("analyze", help="per-buffer f0/loudness CSV")
    analyze.add_argument("--in", dest="input", required=True)
    analyze.set_defaults(func=cmd_analyze)

    models = sub.add_parser("models", help="list loadable timbre models")
    models.add_argument("--root", default=_default_root())
    models.set_defaults(func=cmd_models)

    live = sub.add_parser("live", help="run the engine and control server")
    live.add_argument("--root", default=_default_root())
    live.add_argument("--model", default="violin")
    live.add_argument("--port", type=int, default=8765)
    live.add_argument("--host", default="127.0.0.1")
    live.add_argument("--rate", type=float, default=44100.0)
    live.add_argument("--buffer", type=int, default=1024)
    live.add_argument("--seed", type=int, default=0)
    live.set_defaults(func=cmd_live)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
