/**
 * Strict reader for the comma-separated files the solver harness emits.
 *
 * The format is plain: one header row, no quoting, no embedded commas.
 * Every data row must carry exactly as many fields as the header; a
 * mismatch is an error naming the offending 1-based row.
 */

export interface CsvTable {
  header: string[];
  rows: string[][];
}

export function parseCsv(text: string): CsvTable {
  const lines = text.split(/\r?\n/);
  while (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error("CSV is empty (no header row)");
  }
  const header = lines[0].split(",");
  const rows: string[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split(",");
    if (fields.length !== header.length) {
      throw new Error(
        `CSV row ${i + 1} has ${fields.length} fields, expected ${header.length}`,
      );
    }
    rows.push(fields);
  }
  return { header, rows };
}

/** Column values as numbers; throws naming the row on non-numeric cells. */
export function numericColumn(table: CsvTable, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`CSV has no column named ${JSON.stringify(name)}`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (row[idx] === "" || Number.isNaN(value)) {
      throw new Error(
        `CSV row ${i + 2}, column ${JSON.stringify(name)}: not a number: ${JSON.stringify(row[idx])}`,
      );
    }
    return value;
  });
}

/** True when every cell of the column parses as a finite number. */
export function isNumericColumn(table: CsvTable, name: string): boolean {
  const idx = table.header.indexOf(name);
  if (idx < 0 || table.rows.length === 0) {
    return false;
  }
  return table.rows.every(
    (row) => row[idx] !== "" && Number.isFinite(Number(row[idx])),
  );
}
