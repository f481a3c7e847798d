// DOM widget builders. Values flow: user input -> throttled setParam ->
// server clamps -> param_state -> SurfaceState -> widget display, so the
// widget always ends up showing what the engine actually applied.

import type { ControlClient, ParamDescriptor } from "./protocol.js";
import type { PerKeyThrottle } from "./throttle.js";
import type { SurfaceState } from "./surface.js";

export interface WidgetRefs {
  update(id: string, state: SurfaceState): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function formatValue(value: number | string | undefined): string {
  if (typeof value === "number") {
    return Math.abs(value) >= 100 ? value.toFixed(0) : value.toFixed(2);
  }
  return String(value ?? "");
}

class KnobWidget {
  readonly root: HTMLElement;
  private slider: HTMLInputElement;
  private readout: HTMLElement;

  constructor(private desc: ParamDescriptor, client: ControlClient,
              throttle: PerKeyThrottle) {
    this.root = el("label", "knob");
    this.root.append(el("span", "knob-name", desc.id.replace(/_/g, " ")));
    this.slider = el("input");
    this.slider.type = "range";
    this.slider.min = String(desc.min);
    this.slider.max = String(desc.max);
    this.slider.step = String((desc.max - desc.min) / 200 || 0.01);
    this.slider.value = String(desc.default);
    this.readout = el("span", "knob-value", formatValue(desc.default));
    this.slider.addEventListener("input", () => {
      const value = Number(this.slider.value);
      this.readout.textContent = formatValue(value);
      throttle.push(desc.id, () => client.setParam(desc.id, value));
    });
    this.root.append(this.slider, this.readout);
  }

  update(state: SurfaceState): void {
    const value = state.widgetValue(this.desc.id);
    if (typeof value === "number") {
      this.slider.value = String(value);
      this.readout.textContent = formatValue(value);
    }
  }
}

class SelectorWidget {
  readonly root: HTMLElement;
  private select: HTMLSelectElement;

  constructor(private desc: ParamDescriptor, client: ControlClient,
              options: string[]) {
    this.root = el("label", "selector");
    this.root.append(el("span", "knob-name", desc.id.replace(/_/g, " ")));
    this.select = el("select");
    for (const option of options) {
      const opt = el("option", undefined, option);
      opt.value = option;
      this.select.append(opt);
    }
    this.select.value = String(desc.default);
    this.select.addEventListener("change", () => {
      if (desc.id === "model") {
        client.selectModel(this.select.value);
      } else {
        client.setParam(desc.id, this.select.value);
      }
    });
    this.root.append(this.select);
  }

  update(state: SurfaceState): void {
    const value = state.widgetValue(this.desc.id);
    if (value !== undefined) {
      this.select.value = String(value);
    }
  }
}

// The graphic harmonics editor: one vertical bar per harmonic, drag to
// shape, double-click or the reset button restores flat. The hint label is
// always visible so the interaction is discoverable.
class HarmonicsEditor {
  readonly root: HTMLElement;
  private canvas: HTMLCanvasElement;
  private dragging = false;

  constructor(private desc: ParamDescriptor, private client: ControlClient,
              private throttle: PerKeyThrottle,
              private state: () => SurfaceState | null) {
    this.root = el("div", "harmonics-editor");
    const header = el("div", "harmonics-header");
    header.append(el("span", "knob-name", "graphic harmonics editor"));
    const reset = el("button", "reset-button", "reset");
    reset.addEventListener("click", () => this.reset());
    header.append(reset);
    this.root.append(header);
    this.canvas = el("canvas", "harmonics-canvas");
    this.canvas.width = 480;
    this.canvas.height = 120;
    this.root.append(this.canvas);
    this.root.append(el("div", "hint", "drag the bars to shape harmonics"));

    this.canvas.addEventListener("pointerdown", (ev) => {
      this.dragging = true;
      this.canvas.setPointerCapture(ev.pointerId);
      this.applyPointer(ev);
    });
    this.canvas.addEventListener("pointermove", (ev) => {
      if (this.dragging) this.applyPointer(ev);
    });
    this.canvas.addEventListener("pointerup", () => {
      this.dragging = false;
    });
  }

  private count(): number {
    return this.state()?.harmonicEdit.length ?? this.desc.count ?? 0;
  }

  private applyPointer(ev: PointerEvent): void {
    const surface = this.state();
    if (!surface || !this.count()) return;
    const rect = this.canvas.getBoundingClientRect();
    const x = (ev.clientX - rect.left) / rect.width;
    const y = (ev.clientY - rect.top) / rect.height;
    const index = Math.min(Math.max(Math.floor(x * this.count()), 0),
                           this.count() - 1);
    const span = this.desc.max - this.desc.min;
    const value = Math.min(Math.max(
      this.desc.min + (1 - y) * span, this.desc.min), this.desc.max);
    surface.harmonicEdit[index] = value;
    this.throttle.push(`harmonic_edit[${index}]`,
                       () => this.client.setParam(`harmonic_edit[${index}]`, value));
    this.draw();
  }

  private reset(): void {
    const surface = this.state();
    if (!surface) return;
    const fallback = Number(this.desc.default);
    for (let i = 0; i < surface.harmonicEdit.length; i++) {
      surface.harmonicEdit[i] = fallback;
      this.client.setParam(`harmonic_edit[${i}]`, fallback);
    }
    this.draw();
  }

  update(): void {
    this.draw();
  }

  draw(): void {
    const surface = this.state();
    const ctx = this.canvas.getContext("2d");
    if (!ctx || !surface) return;
    const { width, height } = this.canvas;
    ctx.fillStyle = "#10141c";
    ctx.fillRect(0, 0, width, height);
    const count = surface.harmonicEdit.length;
    if (!count) return;
    const span = this.desc.max - this.desc.min;
    const barWidth = width / count;
    ctx.fillStyle = "#58b6ff";
    for (let i = 0; i < count; i++) {
      const frac = (surface.harmonicEdit[i] - this.desc.min) / span;
      const barHeight = Math.max(frac * height, 1);
      ctx.fillRect(i * barWidth + 1, height - barHeight,
                   Math.max(barWidth - 2, 1), barHeight);
    }
  }
}

export function buildControlSurface(
  mount: HTMLElement,
  groups: Map<string, ParamDescriptor[]>,
  client: ControlClient,
  throttle: PerKeyThrottle,
  state: () => SurfaceState | null,
): WidgetRefs {
  const widgets = new Map<string, { update(state: SurfaceState): void }>();
  mount.textContent = "";
  for (const [section, params] of groups) {
    if (!params.length) continue;
    const panel = el("section", "panel");
    panel.append(el("h2", undefined, section));
    for (const desc of params) {
      if (desc.kind === "multislider") {
        const editor = new HarmonicsEditor(desc, client, throttle, state);
        widgets.set(desc.id, { update: () => editor.update() });
        panel.append(editor.root);
      } else if (desc.kind === "selector") {
        const widget = new SelectorWidget(desc, client, desc.options ?? []);
        widgets.set(desc.id, widget);
        panel.append(widget.root);
      } else {
        const widget = new KnobWidget(desc, client, throttle);
        widgets.set(desc.id, widget);
        panel.append(widget.root);
      }
    }
    mount.append(panel);
  }
  return {
    update(id, surface) {
      widgets.get(id)?.update(surface);
    },
  };
}
