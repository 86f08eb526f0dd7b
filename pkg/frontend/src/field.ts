/**
 * Reader for the solver's binary field dumps.
 *
 * field.bin holds little-endian interleaved complex float64 in the
 * canonical unknown ordering (component-major, x fastest); the .json
 * sidecar carries dims [nx, ny, nz], voxel pitch, origin, and wavelength.
 */

import { readFileSync } from "node:fs";

export interface FieldSidecar {
  dims: [number, number, number];
  delta: number;
  origin: [number, number, number];
  component_order: string;
  wavelength: number | null;
}

export interface FieldData {
  sidecar: FieldSidecar;
  /** interleaved re/im pairs, length 2 * 3 * nx * ny * nz */
  values: Float64Array;
}

export function readField(binPath: string): FieldData {
  const jsonPath = binPath.replace(/\.bin$/, ".json");
  const sidecar = JSON.parse(readFileSync(jsonPath, "utf8")) as FieldSidecar;
  const [nx, ny, nz] = sidecar.dims;
  const buf = readFileSync(binPath);
  const values = new Float64Array(buf.buffer, buf.byteOffset, buf.byteLength / 8);
  const expect = 2 * 3 * nx * ny * nz;
  if (values.length !== expect) {
    throw new Error(
      `${binPath}: ${values.length} doubles, sidecar promises ${expect}`,
    );
  }
  return { sidecar, values };
}

export type PlaneAxis = "x" | "y" | "z";

export interface FieldSlice {
  /** magnitude |e| per pixel, row-major [height][width] flattened */
  magnitude: Float64Array;
  width: number;
  height: number;
  axisLabels: [string, string];
}

/**
 * Total-field magnitude sqrt(sum over components |e_c|^2) on one grid
 * plane. Defaults to the mid plane of the chosen axis (z by default, i.e.
 * the (x, y) plane at mid height).
 */
export function fieldSlice(
  field: FieldData,
  plane: PlaneAxis = "z",
  index?: number,
): FieldSlice {
  const [nx, ny, nz] = field.sidecar.dims;
  const n = nx * ny * nz;
  const at = (comp: number, ix: number, iy: number, iz: number): number => {
    const g = ix + nx * (iy + ny * iz) + comp * n;
    const re = field.values[2 * g];
    const im = field.values[2 * g + 1];
    return re * re + im * im;
  };
  const magAt = (ix: number, iy: number, iz: number): number =>
    Math.sqrt(at(0, ix, iy, iz) + at(1, ix, iy, iz) + at(2, ix, iy, iz));

  const sizes = { x: nx, y: ny, z: nz } as const;
  const cut = index ?? Math.floor(sizes[plane] / 2);
  if (cut < 0 || cut >= sizes[plane]) {
    throw new Error(`plane index ${cut} outside axis ${plane} of size ${sizes[plane]}`);
  }

  let width: number;
  let height: number;
  let axisLabels: [string, string];
  let value: (col: number, row: number) => number;
  if (plane === "z") {
    width = nx;
    height = ny;
    axisLabels = ["x (voxels)", "y (voxels)"];
    value = (col, row) => magAt(col, row, cut);
  } else if (plane === "y") {
    width = nx;
    height = nz;
    axisLabels = ["x (voxels)", "z (voxels)"];
    value = (col, row) => magAt(col, cut, row);
  } else {
    width = ny;
    height = nz;
    axisLabels = ["y (voxels)", "z (voxels)"];
    value = (col, row) => magAt(cut, col, row);
  }

  const magnitude = new Float64Array(width * height);
  for (let row = 0; row < height; row++) {
    for (let col = 0; col < width; col++) {
      magnitude[row * width + col] = value(col, row);
    }
  }
  return { magnitude, width, height, axisLabels };
}
