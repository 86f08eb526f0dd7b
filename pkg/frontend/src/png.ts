/**
 * Minimal PNG writer: 8-bit RGB, filter type 0, one zlib-deflated IDAT.
 * Enough for deterministic heatmap dumps without an image dependency.
 */

import { deflateSync } from "node:zlib";

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(data: Uint8Array): number {
  let c = 0xffffffff;
  for (const byte of data) {
    c = CRC_TABLE[(c ^ byte) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(payload.length, 0);
  head.write(type, 4, "ascii");
  const body = Buffer.concat([head.subarray(4), payload]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head.subarray(0, 4), body, crc]);
}

/** Encode row-major RGB pixels (3 bytes per pixel) into a PNG buffer. */
export function encodePng(width: number, height: number, rgb: Uint8Array): Buffer {
  if (rgb.length !== 3 * width * height) {
    throw new Error(`pixel buffer is ${rgb.length} bytes, expected ${3 * width * height}`);
  }
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // color type RGB
  const raw = Buffer.alloc((3 * width + 1) * height);
  for (let row = 0; row < height; row++) {
    raw[row * (3 * width + 1)] = 0; // filter: none
    rgb.subarray(3 * width * row, 3 * width * (row + 1)).forEach((v, i) => {
      raw[row * (3 * width + 1) + 1 + i] = v;
    });
  }
  const idat = deflateSync(raw, { level: 9 });
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

/** Simple blue-to-yellow-to-red heat colormap over [0, 1]. */
export function heatColor(t: number): [number, number, number] {
  const clamp = (v: number) => Math.max(0, Math.min(255, Math.round(v)));
  const s = Math.max(0, Math.min(1, t));
  if (s < 0.5) {
    const u = s / 0.5; // dark blue -> yellow
    return [clamp(255 * u), clamp(40 + 215 * u), clamp(90 * (1 - u))];
  }
  const u = (s - 0.5) / 0.5; // yellow -> red
  return [255, clamp(255 * (1 - u)), 0];
}

export interface HeatmapOptions {
  /** integer pixel size per data cell (default 8) */
  cellSize?: number;
  /** flip vertically so row 0 renders at the bottom (default true) */
  originLower?: boolean;
}

/** Render a row-major scalar field to an RGB PNG with per-cell blocks. */
export function renderHeatmap(
  values: Float64Array,
  width: number,
  height: number,
  options: HeatmapOptions = {},
): Buffer {
  const cell = options.cellSize ?? 8;
  const originLower = options.originLower ?? true;
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const span = hi > lo ? hi - lo : 1;
  const pw = width * cell;
  const ph = height * cell;
  const rgb = new Uint8Array(3 * pw * ph);
  for (let row = 0; row < height; row++) {
    const srcRow = originLower ? height - 1 - row : row;
    for (let col = 0; col < width; col++) {
      const t = (values[srcRow * width + col] - lo) / span;
      const [r, g, b] = heatColor(t);
      for (let dy = 0; dy < cell; dy++) {
        for (let dx = 0; dx < cell; dx++) {
          const p = 3 * ((row * cell + dy) * pw + (col * cell + dx));
          rgb[p] = r;
          rgb[p + 1] = g;
          rgb[p + 2] = b;
        }
      }
    }
  }
  return encodePng(pw, ph, rgb);
}
