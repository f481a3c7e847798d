// App bootstrap: connect, build the surface from hello, pump telemetry
// into the spectrogram via an animation-frame queue, reconnect on loss.

import { ControlClient, SUBPROTOCOL } from "./protocol.js";
import type { HelloReply, TelemetryMessage } from "./protocol.js";
import { PerKeyThrottle } from "./throttle.js";
import { SurfaceState, groupParams } from "./surface.js";
import { buildControlSurface } from "./dom.js";
import type { WidgetRefs } from "./dom.js";
import { SpectrogramModel } from "./spectrogram.js";

const SEND_INTERVAL_MS = 50; // at most 20 param_set/s per widget

const KEYBOARD_NOTES: Array<[string, number]> = [
  ["C3", 48], ["D3", 50], ["E3", 52], ["F3", 53], ["G3", 55],
  ["A3", 57], ["B3", 59], ["C4", 60], ["D4", 62], ["E4", 64],
  ["F4", 65], ["G4", 67], ["A4", 69], ["B4", 71], ["C5", 72],
];

class App {
  private client: ControlClient | null = null;
  private state: SurfaceState | null = null;
  private widgets: WidgetRefs | null = null;
  private throttle = new PerKeyThrottle(SEND_INTERVAL_MS);
  private spectrogram = new SpectrogramModel(480, 256);
  private pendingColumns: number[][] = [];
  private lastTelemetryAt = 0;

  private banner = document.getElementById("banner")!;
  private surfaceMount = document.getElementById("surface")!;
  private canvas = document.getElementById("spectrogram") as HTMLCanvasElement;
  private statusLine = document.getElementById("status")!;
  private keyboardMount = document.getElementById("keyboard")!;

  start(): void {
    this.buildKeyboard();
    this.connect();
    requestAnimationFrame(() => this.paint());
  }

  private connect(): void {
    const url = `ws://${location.host}/ws`;
    const socket = new WebSocket(url, SUBPROTOCOL);
    this.client = new ControlClient(socket, {
      onHello: (hello) => this.onHello(hello),
      onParamState: (msg) => {
        const widget = this.state?.applyParamState(msg.id, msg.value);
        if (widget && this.state) this.widgets?.update(widget, this.state);
      },
      onTelemetry: (telemetry) => this.onTelemetry(telemetry),
      onError: (reason) => this.showStatus(`server: ${reason}`),
      onClose: () => {
        this.banner.classList.remove("hidden");
        setTimeout(() => this.connect(), 1500);
      },
    });
  }

  private onHello(hello: HelloReply): void {
    this.banner.classList.add("hidden");
    this.state = new SurfaceState(hello);
    this.widgets = buildControlSurface(
      this.surfaceMount, groupParams(hello.params),
      this.client!, this.throttle, () => this.state);
    if (this.state) {
      this.widgets.update("harmonic_edit", this.state);
    }
    this.showStatus(`connected, ${hello.models.length} models`);
  }

  private onTelemetry(telemetry: TelemetryMessage): void {
    this.lastTelemetryAt = performance.now();
    this.pendingColumns.push(telemetry.spectrogram);
    if (this.pendingColumns.length > 8) {
      this.pendingColumns.splice(0, this.pendingColumns.length - 8);
    }
    const f0 = telemetry.f0_hz > 0 ? `${telemetry.f0_hz.toFixed(1)} Hz` : "--";
    this.showStatus(
      `f0 ${f0}  rms ${telemetry.rms_db.toFixed(1)} dB  `
      + `load ${(telemetry.utilization * 100).toFixed(0)}%`);
  }

  private paint(): void {
    for (const column of this.pendingColumns) {
      this.spectrogram.pushColumn(column);
    }
    this.pendingColumns = [];
    const ctx = this.canvas.getContext("2d");
    if (ctx) {
      const image = new ImageData(
        new Uint8ClampedArray(this.spectrogram.image),
        this.spectrogram.width, this.spectrogram.height);
      ctx.putImageData(image, 0, 0);
    }
    const stale = performance.now() - this.lastTelemetryAt > 2000;
    document.getElementById("stale")!.classList.toggle("hidden", !stale);
    requestAnimationFrame(() => this.paint());
  }

  private buildKeyboard(): void {
    for (const [label, note] of KEYBOARD_NOTES) {
      const key = document.createElement("button");
      key.className = "key";
      key.textContent = label;
      key.addEventListener("pointerdown", () => this.client?.note("on", note));
      key.addEventListener("pointerup", () => this.client?.note("off", note));
      key.addEventListener("pointerleave", () => this.client?.note("off", note));
      this.keyboardMount.append(key);
    }
  }

  private showStatus(text: string): void {
    this.statusLine.textContent = text;
  }
}

new App().start();
