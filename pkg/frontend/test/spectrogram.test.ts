import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import {
  SpectrogramModel, brightRows, columnToPixels, paletteColor, rowToBin,
} from "../src/spectrogram.js";

interface Fixture {
  sample_rate: number;
  buffer_len: number;
  f0_hz: number;
  note_off_column: number;
  columns: number[][];
}

const fixture: Fixture = JSON.parse(readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), "fixtures",
       "telemetry_440.json"),
  "utf-8"));

test("palette is monotone in brightness", () => {
  let previous = -1;
  for (let v = 0; v <= 255; v += 5) {
    const [r, g, b] = paletteColor(v);
    const luminance = r + g + b;
    assert.ok(luminance >= previous, `palette dips at ${v}`);
    previous = luminance;
  }
});

test("silence telemetry renders a uniform lowest-color band", () => {
  const silent = new Array(513).fill(0);
  const pixels = columnToPixels(silent, 64);
  const [r0, g0, b0] = [pixels[0], pixels[1], pixels[2]];
  for (let row = 0; row < 64; row++) {
    assert.equal(pixels[row * 4], r0);
    assert.equal(pixels[row * 4 + 1], g0);
    assert.equal(pixels[row * 4 + 2], b0);
  }
  assert.deepEqual([r0, g0, b0], paletteColor(0));
});

test("a 440 Hz single-harmonic render draws one horizontal line", () => {
  const numBins = fixture.columns[0].length;
  const model = new SpectrogramModel(fixture.columns.length, numBins);
  for (const column of fixture.columns.slice(0, fixture.note_off_column)) {
    model.pushColumn(column);
  }
  // with height == numBins, row r shows bin (numBins-1-r)
  const expectedBin = Math.round(
    fixture.f0_hz / (fixture.sample_rate / 2) * (numBins - 1));
  const luminance = model.columnLuminance(model.width - 1);
  const bright = brightRows(luminance, 160);
  assert.ok(bright.length >= 1, "no bright rows found");
  for (const row of bright) {
    const bin = rowToBin(row, numBins, numBins);
    assert.ok(Math.abs(bin - expectedBin) <= 1,
              `bright row at bin ${bin}, expected ${expectedBin}`);
  }
});

test("the line terminates within the reverb tail after note-off", () => {
  const numBins = fixture.columns[0].length;
  const model = new SpectrogramModel(fixture.columns.length, numBins);
  for (const column of fixture.columns) {
    model.pushColumn(column);
  }
  const lastBright = brightRows(
    model.columnLuminance(model.width - 1), 160);
  assert.equal(lastBright.length, 0,
               "tone still bright at the end of the tail");
});

test("frame drops paint gaps without disturbing neighbors", () => {
  const model = new SpectrogramModel(4, 8);
  const loud = new Array(16).fill(255);
  model.pushColumn(loud);
  model.pushGap();
  const gapLuma = model.columnLuminance(3);
  const toneLuma = model.columnLuminance(2);
  assert.ok(Math.max(...gapLuma) < 64);
  assert.ok(Math.min(...toneLuma) > 128);
});

test("scrolling keeps width constant and evicts the oldest column", () => {
  const model = new SpectrogramModel(3, 4);
  const a = new Array(8).fill(255);
  const b = new Array(8).fill(0);
  model.pushColumn(a);
  model.pushColumn(b);
  model.pushColumn(b);
  model.pushColumn(b); // first bright column scrolled out
  for (let x = 0; x < 3; x++) {
    assert.ok(Math.max(...model.columnLuminance(x)) < 64);
  }
});
