import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { fieldSlice, readField } from "../src/field.js";

const FIXTURES = join(__dirname, "fixtures");

function writeSyntheticField(dir: string): string {
  // 2 x 2 x 1 grid with known component values per voxel
  const nx = 2,
    ny = 2,
    nz = 1;
  const n = nx * ny * nz;
  const values = new Float64Array(2 * 3 * n);
  const set = (comp: number, ix: number, iy: number, re: number, im: number) => {
    const g = ix + nx * iy + comp * n;
    values[2 * g] = re;
    values[2 * g + 1] = im;
  };
  set(0, 0, 0, 3, 4); // |e_x| = 5 at voxel (0,0)
  set(1, 1, 0, 0, 2); // |e_y| = 2 at voxel (1,0)
  set(2, 0, 1, 1, 0); // |e_z| = 1 at voxel (0,1)
  const bin = join(dir, "field.bin");
  writeFileSync(bin, Buffer.from(values.buffer));
  writeFileSync(
    join(dir, "field.json"),
    JSON.stringify({
      dims: [nx, ny, nz],
      delta: 1e-8,
      origin: [0, 0, 0],
      component_order: "x,y,z",
      wavelength: null,
    }),
  );
  return bin;
}

describe("readField", () => {
  it("round-trips a synthetic dump", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const bin = writeSyntheticField(dir);
    const field = readField(bin);
    expect(field.sidecar.dims).toEqual([2, 2, 1]);
    expect(field.values.length).toBe(2 * 3 * 4);
  });

  it("rejects a size mismatch", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const bin = writeSyntheticField(dir);
    writeFileSync(bin, Buffer.alloc(16));
    expect(() => readField(bin)).toThrow(/promises/);
  });

  it("reads a real solver dump", () => {
    const field = readField(join(FIXTURES, "field.bin"));
    const [nx, ny, nz] = field.sidecar.dims;
    expect(field.values.length).toBe(2 * 3 * nx * ny * nz);
  });
});

describe("fieldSlice", () => {
  it("computes per-voxel total magnitude on the mid-z plane", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const field = readField(writeSyntheticField(dir));
    const slice = fieldSlice(field, "z");
    expect(slice.width).toBe(2);
    expect(slice.height).toBe(2);
    // row-major [iy][ix]
    expect(Array.from(slice.magnitude)).toEqual([5, 2, 1, 0]);
  });

  it("slices a real dump on every axis without error", () => {
    const field = readField(join(FIXTURES, "field.bin"));
    for (const plane of ["x", "y", "z"] as const) {
      const s = fieldSlice(field, plane);
      expect(s.magnitude.length).toBe(s.width * s.height);
      expect(Math.max(...s.magnitude)).toBeGreaterThan(0);
    }
  });

  it("rejects an out-of-range plane index", () => {
    const field = readField(join(FIXTURES, "field.bin"));
    expect(() => fieldSlice(field, "z", 99)).toThrow(/outside/);
  });
});
