// Control-surface model: grouping of hello-advertised parameters into the
// seven panel sections, plus the client-side value store the widgets bind
// to. Everything derives from the hello payload; nothing is hardcoded.

import type { HelloReply, ParamDescriptor } from "./protocol.js";

export const SECTIONS = [
  "Input selector",
  "Models selector",
  "Additive synthesis",
  "Subtractive synthesis",
  "Modulation",
  "Reverb",
  "Output",
] as const;

export type Section = (typeof SECTIONS)[number];

export function sectionFor(id: string): Section {
  if (id === "input_mode") return "Input selector";
  if (id === "model") return "Models selector";
  if (id === "harmonic_edit" || id === "stretch" || id === "shift"
      || id === "harmonic_gain") return "Additive synthesis";
  if (id.startsWith("noise_")) return "Subtractive synthesis";
  if (id.startsWith("mod_")) return "Modulation";
  if (id.startsWith("reverb_")) return "Reverb";
  return "Output";
}

export function groupParams(
  params: ParamDescriptor[],
): Map<Section, ParamDescriptor[]> {
  const groups = new Map<Section, ParamDescriptor[]>();
  for (const section of SECTIONS) {
    groups.set(section, []);
  }
  for (const param of params) {
    groups.get(sectionFor(param.id))!.push(param);
  }
  return groups;
}

const EDIT_RE = /^harmonic_edit\[(\d+)\]$/;

export class SurfaceState {
  readonly values = new Map<string, number | string>();
  harmonicEdit: number[] = [];
  models: string[] = [];

  constructor(hello: HelloReply) {
    this.models = hello.models;
    for (const param of hello.params) {
      if (param.id === "harmonic_edit") {
        const count = param.count ?? 0;
        this.harmonicEdit = new Array<number>(count).fill(
          Number(param.default));
      } else {
        this.values.set(param.id, param.default);
      }
    }
  }

  // Returns the widget id whose display changed, or null.
  applyParamState(id: string, value: number | string): string | null {
    const edit = EDIT_RE.exec(id);
    if (edit) {
      const index = Number(edit[1]);
      if (index < this.harmonicEdit.length) {
        this.harmonicEdit[index] = Number(value);
        return "harmonic_edit";
      }
      return null;
    }
    if (id === "harmonic_edit") {
      return null; // only indexed updates carry values
    }
    this.values.set(id, value);
    return id;
  }

  widgetValue(id: string): number | string | undefined {
    return this.values.get(id);
  }
}
