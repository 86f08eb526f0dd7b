import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { extractIterations, extractSpectrum, parseCsv } from "../src/extract.js";

const FIXTURES = join(__dirname, "fixtures");
const sweepText = readFileSync(join(FIXTURES, "sweep.csv"), "utf8");

describe("parseCsv", () => {
  it("reads header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("names the offending row on field-count mismatch", () => {
    expect(() => parseCsv("a,b\n1,2\n7\n")).toThrow(/row 3/);
  });

  it("rejects empty input", () => {
    expect(() => parseCsv("")).toThrow(/empty/);
  });
});

describe("extractIterations", () => {
  it("plots exactly the CSV values from a real sweep", () => {
    const table = parseCsv(sweepText);
    const data = extractIterations(sweepText);
    expect(data.xName).toBe("length_vox");
    const iterCols = table.header.filter((h) => h.startsWith("iterations"));
    expect(data.series.map((s) => s.name)).toEqual(iterCols);
    for (const s of data.series) {
      const col = table.header.indexOf(s.name);
      const raw = table.rows.map((r) => Number(r[col]));
      expect(s.y).toEqual(raw); // exact equality with the CSV values
      expect(s.x).toEqual(table.rows.map((r) => Number(r[0])));
    }
  });

  it("is deterministic across repeated extraction", () => {
    expect(extractIterations(sweepText)).toEqual(extractIterations(sweepText));
  });

  it("rejects a header-only sweep", () => {
    const headerOnly = sweepText.split("\n")[0] + "\n";
    expect(() => extractIterations(headerOnly)).toThrow(/no data rows/);
  });

  it("honors an explicit x column", () => {
    const data = extractIterations(sweepText, "dielectric_ratio");
    expect(data.xName).toBe("dielectric_ratio");
    expect(data.series[0].x).toEqual([1, 1, 1]);
  });

  it("errors on a non-numeric series cell, naming the row", () => {
    expect(() => extractIterations("n,iterations_a\n1,5\n2,oops\n")).toThrow(/row 3/);
  });
});

describe("extractSpectrum", () => {
  const specText = readFileSync(join(FIXTURES, "spectrum.csv"), "utf8");

  it("pairs re/im columns from a real spectrum dump", () => {
    const sets = extractSpectrum(specText);
    expect(sets.map((s) => s.name)).toEqual(["unprec", "prec"]);
    const table = parseCsv(specText);
    expect(sets[0].re.length).toBe(table.rows.length);
    expect(sets[0].re[0]).toBe(Number(table.rows[0][0]));
    expect(sets[1].im[0]).toBe(Number(table.rows[0][3]));
  });

  it("rejects an unpaired re column", () => {
    expect(() => extractSpectrum("re_a,im_b\n1,2\n")).toThrow(/im_a/);
  });
});
