#!/usr/bin/env node
/**
 * plotkit: render solver-harness outputs to images.
 *
 *   plotkit iterations  --in sweep.csv            --out plot.svg [--x NAME]
 *   plotkit spectrum    --in spectrum.csv [--in2 other.csv] --out plot.svg
 *   plotkit field-slice --in field.bin            --out slice.png
 *                       [--plane x|y|z] [--index N] [--cell N]
 *
 * Exits 1 with a message on any error; no output file is written then.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { extractIterations, extractSpectrum } from "./extract.js";
import { fieldSlice, PlaneAxis, readField } from "./field.js";
import { renderHeatmap } from "./png.js";
import { renderIterations, renderSpectrum } from "./svg.js";

interface Args {
  kind: string;
  opts: Map<string, string>;
}

function parseArgs(argv: string[]): Args {
  if (argv.length === 0) {
    throw new Error("usage: plotkit <iterations|spectrum|field-slice> --in PATH --out PATH");
  }
  const [kind, ...rest] = argv;
  const opts = new Map<string, string>();
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    if (!flag.startsWith("--") || i + 1 >= rest.length) {
      throw new Error(`malformed option ${flag}`);
    }
    opts.set(flag.slice(2), rest[i + 1]);
  }
  return { kind, opts };
}

function required(opts: Map<string, string>, name: string): string {
  const v = opts.get(name);
  if (v === undefined) {
    throw new Error(`missing required --${name}`);
  }
  return v;
}

export function run(argv: string[]): void {
  const { kind, opts } = parseArgs(argv);
  const out = required(opts, "out");
  if (kind === "iterations") {
    const data = extractIterations(
      readFileSync(required(opts, "in"), "utf8"),
      opts.get("x"),
    );
    writeFileSync(out, renderIterations(data));
  } else if (kind === "spectrum") {
    const sets = extractSpectrum(readFileSync(required(opts, "in"), "utf8"));
    const second = opts.get("in2");
    if (second !== undefined) {
      for (const s of extractSpectrum(readFileSync(second, "utf8"))) {
        sets.push({ ...s, name: `${s.name} (2)` });
      }
    }
    writeFileSync(out, renderSpectrum(sets));
  } else if (kind === "field-slice") {
    const field = readField(required(opts, "in"));
    const plane = (opts.get("plane") ?? "z") as PlaneAxis;
    if (!["x", "y", "z"].includes(plane)) {
      throw new Error(`--plane must be x, y, or z, got ${plane}`);
    }
    const indexOpt = opts.get("index");
    const slice = fieldSlice(field, plane, indexOpt === undefined ? undefined : Number(indexOpt));
    const cell = Number(opts.get("cell") ?? 8);
    writeFileSync(
      out,
      renderHeatmap(slice.magnitude, slice.width, slice.height, { cellSize: cell }),
    );
  } else {
    throw new Error(`unknown plot kind ${JSON.stringify(kind)}`);
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");
if (invokedDirectly) {
  try {
    run(process.argv.slice(2));
  } catch (err) {
    console.error(`plotkit: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}
