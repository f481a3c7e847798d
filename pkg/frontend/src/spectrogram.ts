// Scrolling spectrogram pixels, kept free of canvas APIs so the drawing
// math is testable headless. Columns arrive as 8-bit quantized dB values
// (0 = -120 dB, 255 = 0 dB), bin 0 = DC; rows render low frequencies at
// the bottom. Dropped frames paint a gap column instead of stalling.

export type Rgb = [number, number, number];

const STOPS: Array<[number, Rgb]> = [
  [0.0, [0, 0, 6]],
  [0.25, [70, 14, 105]],
  [0.5, [180, 48, 90]],
  [0.75, [247, 135, 22]],
  [1.0, [252, 254, 200]],
];

export const GAP_COLOR: Rgb = [24, 34, 48];

export function paletteColor(value: number): Rgb {
  const v = Math.min(Math.max(value / 255, 0), 1);
  for (let i = 1; i < STOPS.length; i++) {
    const [p1, c1] = STOPS[i];
    if (v <= p1) {
      const [p0, c0] = STOPS[i - 1];
      const t = (v - p0) / (p1 - p0);
      return [
        Math.round(c0[0] + t * (c1[0] - c0[0])),
        Math.round(c0[1] + t * (c1[1] - c0[1])),
        Math.round(c0[2] + t * (c1[2] - c0[2])),
      ];
    }
  }
  return STOPS[STOPS.length - 1][1];
}

export function rowToBin(row: number, height: number, numBins: number): number {
  // row 0 is the top of the image = highest frequency
  const frac = (height - 1 - row) / Math.max(height - 1, 1);
  return Math.round(frac * (numBins - 1));
}

export function columnToPixels(column: number[], height: number): Uint8ClampedArray {
  const pixels = new Uint8ClampedArray(height * 4);
  for (let row = 0; row < height; row++) {
    const [r, g, b] = paletteColor(column[rowToBin(row, height, column.length)]);
    pixels[row * 4] = r;
    pixels[row * 4 + 1] = g;
    pixels[row * 4 + 2] = b;
    pixels[row * 4 + 3] = 255;
  }
  return pixels;
}

export class SpectrogramModel {
  readonly image: Uint8ClampedArray; // RGBA, row-major width x height

  constructor(readonly width: number, readonly height: number) {
    this.image = new Uint8ClampedArray(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.image[i * 4 + 3] = 255;
    }
  }

  private scrollLeft(): void {
    const rowBytes = this.width * 4;
    for (let row = 0; row < this.height; row++) {
      const start = row * rowBytes;
      this.image.copyWithin(start, start + 4, start + rowBytes);
    }
  }

  private paintLastColumn(pixels: Uint8ClampedArray): void {
    const rowBytes = this.width * 4;
    for (let row = 0; row < this.height; row++) {
      const dst = row * rowBytes + (this.width - 1) * 4;
      this.image[dst] = pixels[row * 4];
      this.image[dst + 1] = pixels[row * 4 + 1];
      this.image[dst + 2] = pixels[row * 4 + 2];
      this.image[dst + 3] = 255;
    }
  }

  pushColumn(column: number[]): void {
    this.scrollLeft();
    this.paintLastColumn(columnToPixels(column, this.height));
  }

  pushGap(): void {
    this.scrollLeft();
    const gap = new Uint8ClampedArray(this.height * 4);
    for (let row = 0; row < this.height; row++) {
      gap[row * 4] = GAP_COLOR[0];
      gap[row * 4 + 1] = GAP_COLOR[1];
      gap[row * 4 + 2] = GAP_COLOR[2];
      gap[row * 4 + 3] = 255;
    }
    this.paintLastColumn(gap);
  }

  columnLuminance(x: number): number[] {
    const rowBytes = this.width * 4;
    const out = new Array<number>(this.height);
    for (let row = 0; row < this.height; row++) {
      const at = row * rowBytes + x * 4;
      out[row] = (this.image[at] + this.image[at + 1] + this.image[at + 2]) / 3;
    }
    return out;
  }
}

export function brightRows(luminance: number[], threshold = 128): number[] {
  const rows: number[] = [];
  for (let row = 0; row < luminance.length; row++) {
    if (luminance[row] >= threshold) {
      rows.push(row);
    }
  }
  return rows;
}
