"""Live control protocol over WebSocket (subprotocol "harmonia.v1").

JSON text frames, one message per frame. Every reply echoes the request's
seq; server-initiated telemetry uses seq = 0. The hello response enumerates
every parameter with min/max/default so UIs render without hardcoded
ranges. Telemetry fan-out is per-client with independent frame dropping and
never applies back-pressure to the audio thread.
"""

from __future__ import annotations

import asyncio
import json
import signal
import sys
import threading
import time
from pathlib import Path

import numpy as np
from aiohttp import WSMsgType, web

from .engine import Engine, NoteEvent, ParamUpdate

PROTOCOL_VERSION = 1
SUBPROTOCOL = "harmonia.v1"
DEFAULT_TELEMETRY_HZ = 30.0

ENGINE_KEY = web.AppKey("engine", Engine)
TELEMETRY_HZ_KEY = web.AppKey("telemetry_hz", float)
STATIC_DIR_KEY = web.AppKey("static_dir", object)

FALLBACK_INDEX = """<!doctype html>
<html><head><title>harmonia</title></head>
<body><h1>harmonia engine is running</h1>
<p>No web UI build found. Build the frontend (frontend/README.md) or connect
any client to <code>/ws</code> with subprotocol <code>harmonia.v1</code>.</p>
</body></html>"""


def quantize_column(column_db) -> list[int]:
    """dB column in [-120, 0] -> 8-bit steps (0..255)."""
    col = np.asarray(column_db, dtype=np.float64)
    q = np.round((col + 120.0) * (255.0 / 120.0))
    return np.clip(q, 0, 255).astype(int).tolist()


def _hello_reply(engine: Engine, seq) -> dict:
    return {
        "type": "hello",
        "version": PROTOCOL_VERSION,
        "params": engine.param_descriptors(),
        "models": engine.model_names(),
        "seq": seq,
    }


def _error(reason: str, seq=0) -> dict:
    return {"type": "error", "reason": reason, "seq": seq}


class ControlSession:
    """One connected client: request handling plus a telemetry pump."""

    def __init__(self, engine: Engine, ws: web.WebSocketResponse,
                 telemetry_hz: float = DEFAULT_TELEMETRY_HZ):
        self.engine = engine
        self.ws = ws
        self.telemetry_hz = telemetry_hz
        self.greeted = False

    async def handle(self, raw: str) -> list[dict]:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError:
            return [_error("malformed JSON")]
        if not isinstance(msg, dict) or "type" not in msg:
            return [_error("message must be an object with a 'type'")]
        seq = msg.get("seq", 0)
        kind = msg["type"]

        if kind == "hello":
            if msg.get("version") != PROTOCOL_VERSION:
                reply = _error(
                    f"protocol version mismatch: server speaks {PROTOCOL_VERSION}",
                    seq)
                reply["close"] = True
                return [reply]
            self.greeted = True
            return [_hello_reply(self.engine, seq)]

        if not self.greeted:
            return [_error("hello required before other messages", seq)]

        if kind == "param_set":
            if "id" not in msg or "value" not in msg:
                return [_error("param_set needs 'id' and 'value'", seq)]
            result = self.engine.push_param(ParamUpdate(msg["id"], msg["value"]))
            if not result.accepted:
                return [_error(result.message, seq)]
            return [{"type": "param_state", "id": msg["id"],
                     "value": result.value, "seq": seq}]

        if kind == "param_get":
            value = self.engine.param_value(str(msg.get("id", "")))
            if value is None:
                return [_error(f"unknown parameter: {msg.get('id')}", seq)]
            return [{"type": "param_state", "id": msg["id"],
                     "value": value, "seq": seq}]

        if kind == "model_list":
            return [{"type": "model_list", "models": self.engine.model_names(),
                     "seq": seq}]

        if kind == "model_select":
            name = msg.get("name")
            if not isinstance(name, str):
                return [_error("model_select needs a 'name'", seq)]
            result = self.engine.push_param(ParamUpdate("model", name))
            if not result.accepted:
                return [_error(result.message, seq)]
            return [{"type": "param_state", "id": "model",
                     "value": name, "seq": seq}]

        if kind == "note":
            # convenience for driving the engine from the UI keyboard
            evt = NoteEvent(str(msg.get("kind", "on")),
                            int(msg.get("note", 69)),
                            int(msg.get("velocity", 100)))
            host = self.engine_host()
            if host is not None:
                host.queue_midi(evt)
                return []
            return [_error("no live audio host", seq)]

        return [_error(f"unknown message type: {kind}", seq)]

    def engine_host(self):
        return getattr(self.engine, "live_host", None)

    async def pump_telemetry(self) -> None:
        """Forward the newest telemetry at most telemetry_hz per second."""
        interval = 1.0 / self.telemetry_hz
        last_sent = -1
        while not self.ws.closed:
            await asyncio.sleep(interval)
            count = getattr(self.engine, "blocks_processed", 0)
            if count == last_sent or not self.engine.telemetry:
                continue
            last_sent = count
            try:
                telemetry = self.engine.telemetry[-1]
            except IndexError:
                continue
            payload = {
                "type": "telemetry",
                "seq": 0,
                "f0_hz": telemetry.f0_hz,
                "rms_db": telemetry.rms_db,
                "peak_db": telemetry.peak_db,
                "utilization": telemetry.utilization,
                "spectrogram": quantize_column(telemetry.spectrogram_db),
            }
            try:
                await self.ws.send_json(payload)
            except (ConnectionResetError, RuntimeError):
                return


async def websocket_handler(request: web.Request) -> web.WebSocketResponse:
    ws = web.WebSocketResponse(protocols=(SUBPROTOCOL,))
    await ws.prepare(request)
    engine = request.app[ENGINE_KEY]
    session = ControlSession(engine, ws, request.app[TELEMETRY_HZ_KEY])
    pump = asyncio.create_task(session.pump_telemetry())
    try:
        async for msg in ws:
            if msg.type != WSMsgType.TEXT:
                continue
            replies = await session.handle(msg.data)
            for reply in replies:
                close_after = reply.pop("close", False)
                await ws.send_json(reply)
                if close_after:
                    await ws.close()
    finally:
        pump.cancel()
    return ws


async def index_handler(request: web.Request) -> web.Response:
    static_dir = request.app[STATIC_DIR_KEY]
    if static_dir:
        index = Path(static_dir) / "index.html"
        if index.is_file():
            return web.FileResponse(index)
    return web.Response(text=FALLBACK_INDEX, content_type="text/html")


def create_app(engine: Engine, static_dir=None,
               telemetry_hz: float = DEFAULT_TELEMETRY_HZ) -> web.Application:
    app = web.Application()
    app[ENGINE_KEY] = engine
    app[TELEMETRY_HZ_KEY] = telemetry_hz
    app[STATIC_DIR_KEY] = str(static_dir) if static_dir else None
    app.router.add_get("/ws", websocket_handler)
    app.router.add_get("/", index_handler)
    if static_dir and Path(static_dir).is_dir():
        app.router.add_static("/app", static_dir)
    return app


def default_static_dir():
    for base in (Path.cwd(), Path(__file__).resolve().parents[2]):
        candidate = base / "frontend" / "dist"
        if candidate.is_dir():
            return candidate
    return None


class LiveHost:
    """Drives the engine in real time: audio device or a paced null loop.

    MIDI events arrive from mido (when present) or the web UI and are
    delivered to process_block at buffer boundaries.
    """

    def __init__(self, engine: Engine):
        self.engine = engine
        engine.live_host = self
        self._midi_queue = []
        self._midi_lock = threading.Lock()
        self._stop = threading.Event()
        self._thread = None
        self._stream = None
        self._out = np.zeros((engine.config.buffer_len, 2))

    def queue_midi(self, event: NoteEvent) -> None:
        with self._midi_lock:
            self._midi_queue.append(event)

    def _drain_midi(self):
        with self._midi_lock:
            events, self._midi_queue = self._midi_queue, []
        return events

    def _tick(self, out) -> None:
        self.engine.process_block(None, self._drain_midi(), out)

    def start(self) -> str:
        """Start audio; returns a description of the driver in use."""
        engine = self.engine
        try:
            import sounddevice

            def callback(outdata, frames, time_info, status):
                self._tick(self._out)
                outdata[:] = self._out

            self._stream = sounddevice.OutputStream(
                samplerate=engine.config.sample_rate, channels=2,
                blocksize=engine.config.buffer_len, callback=callback)
            self._stream.start()
            return "sounddevice output stream"
        except Exception as exc:  # no device / module: stay usable headless
            period = engine.config.buffer_len / engine.config.sample_rate

            def null_loop():
                next_deadline = time.perf_counter()
                while not self._stop.is_set():
                    self._tick(self._out)
                    next_deadline += period
                    delay = next_deadline - time.perf_counter()
                    if delay > 0:
                        time.sleep(delay)

            self._thread = threading.Thread(target=null_loop, daemon=True)
            self._thread.start()
            return f"null audio loop (no output device: {exc})"

    def start_midi(self):
        try:
            import mido
            names = mido.get_input_names()
            if not names:
                return None
            port = mido.open_input(names[0])

            def poll():
                while not self._stop.is_set():
                    for msg in port.iter_pending():
                        if msg.type == "note_on" and msg.velocity > 0:
                            self.queue_midi(NoteEvent("on", msg.note, msg.velocity))
                        elif msg.type in ("note_off", "note_on"):
                            self.queue_midi(NoteEvent("off", msg.note))
                    time.sleep(0.002)

            threading.Thread(target=poll, daemon=True).start()
            return names[0]
        except Exception:
            return None

    def stop(self) -> None:
        self._stop.set()
        if self._stream is not None:
            self._stream.stop()
            self._stream.close()
        if self._thread is not None:
            self._thread.join(timeout=2.0)


async def serve_live(engine: Engine, host: str, port: int,
                     stop_event: asyncio.Event,
                     bound_port: list | None = None) -> None:
    live = LiveHost(engine)
    driver = live.start()
    print(f"audio: {driver}")
    midi_name = live.start_midi()
    if midi_name:
        print(f"midi: listening on {midi_name}")
    else:
        print("midi: no input device, engine accepts UI/websocket notes only")

    app = create_app(engine, static_dir=default_static_dir())
    runner = web.AppRunner(app)
    await runner.setup()
    site = web.TCPSite(runner, host, port)
    await site.start()
    actual = runner.addresses[0][1] if runner.addresses else port
    if bound_port is not None:
        bound_port.append(actual)
    print(f"control server: ws://{host}:{actual}/ws (subprotocol {SUBPROTOCOL})")
    print(f"web ui: http://{host}:{actual}/")
    sys.stdout.flush()
    try:
        await stop_event.wait()
    finally:
        live.stop()
        await runner.cleanup()


def run_live(engine: Engine, host: str = "127.0.0.1", port: int = 8765) -> int:
    async def runner():
        stop = asyncio.Event()
        loop = asyncio.get_running_loop()
        for sig in (signal.SIGINT, signal.SIGTERM):
            try:
                loop.add_signal_handler(sig, stop.set)
            except (NotImplementedError, ValueError):
                pass
        try:
            await serve_live(engine, host, port, stop)
        except OSError as exc:
            print(f"error: cannot bind {host}:{port}: {exc}", file=sys.stderr)
            return 6
        return 0

    try:
        return asyncio.run(runner())
    except KeyboardInterrupt:
        return 0
