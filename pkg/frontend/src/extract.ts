/**
 * Data extraction from harness CSVs into the exact arrays that get drawn.
 *
 * Kept separate from rendering so tests can assert that plotted values
 * equal the CSV contents with no transformation beyond Number().
 */

import { CsvTable, isNumericColumn, numericColumn, parseCsv } from "./csv.js";

export interface Series {
  name: string;
  x: number[];
  y: number[];
}

export interface IterationsData {
  xName: string;
  series: Series[];
}

/**
 * Iteration-count curves from a sweep CSV: x is the first column unless
 * named explicitly; one series per `iterations_*` column (falls back to
 * every numeric column when the sweep carries no iteration columns).
 * Legend names are the column headers, verbatim.
 */
export function extractIterations(csvText: string, xName?: string): IterationsData {
  const table = parseCsv(csvText);
  if (table.rows.length === 0) {
    throw new Error("sweep CSV has a header but no data rows; nothing to plot");
  }
  const x = xName ?? table.header[0];
  const xs = numericColumn(table, x);
  let names = table.header.filter((h) => h.startsWith("iterations"));
  if (names.length === 0) {
    names = table.header.filter((h) => h !== x && isNumericColumn(table, h));
  }
  if (names.length === 0) {
    throw new Error("sweep CSV has no numeric series columns to plot");
  }
  const series = names.map((name) => ({
    name,
    x: xs,
    y: numericColumn(table, name),
  }));
  return { xName: x, series };
}

export interface SpectrumSet {
  name: string;
  re: number[];
  im: number[];
}

/** Eigenvalue scatter sets from a spectrum CSV (paired re_ and im_ columns). */
export function extractSpectrum(csvText: string): SpectrumSet[] {
  const table = parseCsv(csvText);
  if (table.rows.length === 0) {
    throw new Error("spectrum CSV has no data rows");
  }
  const sets: SpectrumSet[] = [];
  for (const h of table.header) {
    if (!h.startsWith("re_")) {
      continue;
    }
    const tag = h.slice(3);
    const imName = `im_${tag}`;
    if (!table.header.includes(imName)) {
      throw new Error(`spectrum CSV has ${h} but no matching ${imName}`);
    }
    sets.push({ name: tag, re: numericColumn(table, h), im: numericColumn(table, imName) });
  }
  if (sets.length === 0) {
    throw new Error("spectrum CSV has no re_*/im_* column pairs");
  }
  return sets;
}

export { parseCsv };
export type { CsvTable };
