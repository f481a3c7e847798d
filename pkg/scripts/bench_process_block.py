#!/usr/bin/env python3
"""Measure process_block cost against the real-time budget.

Runs the full chain (K=60 harmonics, 65 noise bins, reverb + LFO active)
and reports block-cost percentiles as a fraction of the buffer period.

    python scripts/bench_process_block.py --buffer 4096 --blocks 1000
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from harmonia.engine import Engine, EngineConfig, NoteEvent, ParamUpdate  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--root", default="models")
    parser.add_argument("--model", default="violin")
    parser.add_argument("--rate", type=float, default=44100.0)
    parser.add_argument("--buffer", type=int, default=4096)
    parser.add_argument("--blocks", type=int, default=1000)
    args = parser.parse_args()

    engine = Engine(EngineConfig(sample_rate=args.rate, buffer_len=args.buffer,
                                 model_root=args.root, model_name=args.model))
    engine.push_param(ParamUpdate("reverb_mix", 0.4))
    engine.push_param(ParamUpdate("mod_amount", 0.3))
    out = np.empty((args.buffer, 2))
    engine.process_block(None, [NoteEvent("on", 55, 110)], out)
    for _ in range(10):
        engine.process_block(None, [], out)

    costs = np.empty(args.blocks)
    for i in range(args.blocks):
        t0 = time.perf_counter()
        engine.process_block(None, [], out)
        costs[i] = time.perf_counter() - t0

    period = args.buffer / args.rate
    print(f"buffer {args.buffer} @ {args.rate:.0f} Hz -> period {period * 1e3:.2f} ms")
    for label, q in (("p50", 50), ("p95", 95), ("p99", 99), ("max", 100)):
        value = np.percentile(costs, q)
        print(f"  {label}: {value * 1e3:7.3f} ms  ({value / period * 100:5.1f}% of budget)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
