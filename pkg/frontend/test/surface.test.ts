import assert from "node:assert/strict";
import { test } from "node:test";

import type { HelloReply, ParamDescriptor } from "../src/protocol.js";
import { SECTIONS, SurfaceState, groupParams, sectionFor } from "../src/surface.js";

// the parameter table a real engine advertises
const PARAMS: ParamDescriptor[] = [
  { id: "stretch", min: -1, max: 1, default: 0, kind: "knob" },
  { id: "shift", min: -1, max: 1, default: 0, kind: "knob" },
  { id: "harmonic_gain", min: 0, max: 8, default: 1, kind: "knob" },
  { id: "noise_gain", min: 0, max: 8, default: 1, kind: "knob" },
  { id: "noise_color_alpha", min: 0, max: 4, default: 1, kind: "knob" },
  { id: "reverb_mix", min: 0, max: 1, default: 0.3, kind: "knob" },
  { id: "reverb_size", min: 0.01, max: 2, default: 1, kind: "knob" },
  { id: "reverb_glow", min: 0, max: 1, default: 0.5, kind: "knob" },
  { id: "mod_rate", min: 0, max: 20, default: 5, kind: "knob" },
  { id: "mod_amount", min: 0, max: 1, default: 0, kind: "knob" },
  { id: "mod_delay", min: 0, max: 1, default: 0, kind: "knob" },
  { id: "master_gain", min: 0, max: 4, default: 0.8, kind: "knob" },
  { id: "harmonic_edit", min: 0, max: 2, default: 1, kind: "multislider", count: 60 },
  { id: "input_mode", min: 0, max: 1, default: "midi", kind: "selector",
    options: ["midi", "line"] },
  { id: "model", min: 0, max: 0, default: "violin", kind: "selector",
    options: ["violin", "flute"] },
];

function hello(): HelloReply {
  return { type: "hello", version: 1, params: PARAMS,
           models: ["violin", "flute"], seq: 1 };
}

test("fifteen params group into the seven sections, one widget each", () => {
  const groups = groupParams(PARAMS);
  assert.equal(groups.size, SECTIONS.length);
  let total = 0;
  for (const [, params] of groups) {
    total += params.length;
    assert.ok(params.length >= 1, "every section is populated");
  }
  assert.equal(total, PARAMS.length);
});

test("section assignments follow the panel layout", () => {
  assert.equal(sectionFor("input_mode"), "Input selector");
  assert.equal(sectionFor("model"), "Models selector");
  assert.equal(sectionFor("harmonic_edit"), "Additive synthesis");
  assert.equal(sectionFor("stretch"), "Additive synthesis");
  assert.equal(sectionFor("noise_color_alpha"), "Subtractive synthesis");
  assert.equal(sectionFor("mod_rate"), "Modulation");
  assert.equal(sectionFor("reverb_glow"), "Reverb");
  assert.equal(sectionFor("master_gain"), "Output");
});

test("state seeds defaults from hello, including the harmonic editor", () => {
  const state = new SurfaceState(hello());
  assert.equal(state.widgetValue("master_gain"), 0.8);
  assert.equal(state.widgetValue("input_mode"), "midi");
  assert.equal(state.harmonicEdit.length, 60);
  assert.ok(state.harmonicEdit.every((v) => v === 1));
});

test("param_state updates the matching widget value", () => {
  const state = new SurfaceState(hello());
  const widget = state.applyParamState("master_gain", 0.5);
  assert.equal(widget, "master_gain");
  assert.equal(state.widgetValue("master_gain"), 0.5);
});

test("indexed harmonic edits land in the editor array", () => {
  const state = new SurfaceState(hello());
  const widget = state.applyParamState("harmonic_edit[3]", 0.25);
  assert.equal(widget, "harmonic_edit");
  assert.equal(state.harmonicEdit[3], 0.25);
  assert.equal(state.applyParamState("harmonic_edit[999]", 0.5), null);
});

test("clamped echo overwrites an optimistic local value", () => {
  const state = new SurfaceState(hello());
  state.applyParamState("stretch", 9);     // optimistic local set
  state.applyParamState("stretch", 1.0);   // server echo after clamping
  assert.equal(state.widgetValue("stretch"), 1.0);
});
