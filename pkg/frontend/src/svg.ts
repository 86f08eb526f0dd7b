/**
 * Deterministic SVG rendering: fixed canvas, fixed palette, fixed number
 * formatting, no timestamps. Re-rendering the same data yields the same
 * bytes.
 */

import { IterationsData, SpectrumSet } from "./extract.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 70, right: 24, top: 28, bottom: 56 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) {
    throw new Error(`cannot plot non-finite value ${v}`);
  }
  return Number(v.toPrecision(6)).toString();
};

interface Range {
  lo: number;
  hi: number;
}

function padRange(values: number[]): Range {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  return { lo: lo - pad, hi: hi + pad };
}

function ticks(r: Range, count = 5): number[] {
  const out: number[] = [];
  for (let i = 0; i <= count; i++) {
    out.push(r.lo + ((r.hi - r.lo) * i) / count);
  }
  return out;
}

function scale(r: Range, lo: number, hi: number): (v: number) => number {
  return (v) => lo + ((v - r.lo) / (r.hi - r.lo)) * (hi - lo);
}

function frame(
  xr: Range,
  yr: Range,
  xLabel: string,
  yLabel: string,
  title: string,
): { parts: string[]; sx: (v: number) => number; sy: (v: number) => number } {
  const sx = scale(xr, MARGIN.left, WIDTH - MARGIN.right);
  const sy = scale(yr, HEIGHT - MARGIN.bottom, MARGIN.top);
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    `<text x="${WIDTH / 2}" y="18" text-anchor="middle" font-family="sans-serif" font-size="14">${title}</text>`,
  ];
  for (const t of ticks(xr)) {
    const px = fmt(sx(t));
    parts.push(
      `<line x1="${px}" y1="${MARGIN.top}" x2="${px}" y2="${HEIGHT - MARGIN.bottom}" stroke="#dddddd"/>`,
      `<text x="${px}" y="${HEIGHT - MARGIN.bottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of ticks(yr)) {
    const py = fmt(sy(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${py}" x2="${WIDTH - MARGIN.right}" y2="${py}" stroke="#dddddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${WIDTH - MARGIN.left - MARGIN.right}" height="${HEIGHT - MARGIN.top - MARGIN.bottom}" fill="none" stroke="black"/>`,
    `<text x="${WIDTH / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-family="sans-serif" font-size="12">${xLabel}</text>`,
    `<text x="20" y="${HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 20 ${HEIGHT / 2})">${yLabel}</text>`,
  );
  return { parts, sx, sy };
}

function legend(parts: string[], names: string[]): void {
  names.forEach((name, i) => {
    const y = MARGIN.top + 16 + 18 * i;
    const x = WIDTH - MARGIN.right - 230;
    parts.push(
      `<line x1="${x}" y1="${y - 4}" x2="${x + 26}" y2="${y - 4}" stroke="${PALETTE[i % PALETTE.length]}" stroke-width="2"/>`,
      `<text x="${x + 32}" y="${y}" font-family="sans-serif" font-size="11">${name}</text>`,
    );
  });
}

export function renderIterations(data: IterationsData, xLabel?: string): string {
  const xr = padRange(data.series.flatMap((s) => s.x));
  const yr = padRange([0, ...data.series.flatMap((s) => s.y)]);
  const { parts, sx, sy } = frame(
    xr,
    yr,
    xLabel ?? data.xName,
    "GMRES iterations",
    "Iteration count",
  );
  data.series.forEach((s, i) => {
    const pts = s.x.map((xv, k) => `${fmt(sx(xv))},${fmt(sy(s.y[k]))}`).join(" ");
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    s.x.forEach((xv, k) => {
      parts.push(
        `<circle cx="${fmt(sx(xv))}" cy="${fmt(sy(s.y[k]))}" r="3.5" fill="${color}"/>`,
      );
    });
  });
  legend(parts, data.series.map((s) => s.name));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function renderSpectrum(sets: SpectrumSet[]): string {
  const xr = padRange(sets.flatMap((s) => s.re));
  const yr = padRange(sets.flatMap((s) => s.im));
  const { parts, sx, sy } = frame(xr, yr, "Re", "Im", "Eigenvalue spectrum");
  sets.forEach((set, i) => {
    const color = PALETTE[i % PALETTE.length];
    set.re.forEach((re, k) => {
      parts.push(
        `<circle cx="${fmt(sx(re))}" cy="${fmt(sy(set.im[k]))}" r="2" fill="${color}" fill-opacity="0.6"/>`,
      );
    });
  });
  legend(parts, sets.map((s) => s.name));
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
