export { parseCsv, numericColumn, isNumericColumn } from "./csv.js";
export type { CsvTable } from "./csv.js";
export { extractIterations, extractSpectrum } from "./extract.js";
export type { IterationsData, Series, SpectrumSet } from "./extract.js";
export { readField, fieldSlice } from "./field.js";
export type { FieldData, FieldSidecar, FieldSlice, PlaneAxis } from "./field.js";
export { encodePng, heatColor, renderHeatmap } from "./png.js";
export { renderIterations, renderSpectrum } from "./svg.js";
export { run } from "./cli.js";
