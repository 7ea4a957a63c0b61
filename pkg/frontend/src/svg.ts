// Deterministic SVG renderer for a PlotSpec: fixed canvas, fixed palette,
// fixed number formatting, no timestamps or randomness.
import { Curve, PlotSpec } from "./figure.js";

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 80, right: 24, top: 48, bottom: 56 };

const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
];

const px = (value: number): string => value.toFixed(2);

function xScale(spec: PlotSpec): (x: number) => number {
  const [lo, hi] = spec.xRange;
  const span = WIDTH - MARGIN.left - MARGIN.right;
  return (x) => MARGIN.left + ((x - lo) / (hi - lo)) * span;
}

function yScale(spec: PlotSpec): (y: number) => number {
  const [lo, hi] = spec.yRange;
  const span = HEIGHT - MARGIN.top - MARGIN.bottom;
  if (spec.yScale === "log") {
    const llo = Math.log10(lo);
    const lhi = Math.log10(hi);
    return (y) => HEIGHT - MARGIN.bottom - ((Math.log10(y) - llo) / (lhi - llo)) * span;
  }
  return (y) => HEIGHT - MARGIN.bottom - ((y - lo) / (hi - lo)) * span;
}

function niceStep(span: number, targetTicks: number): number {
  const raw = span / targetTicks;
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  for (const m of [1, 2, 5, 10]) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

function linearTicks(lo: number, hi: number, targetTicks = 6): number[] {
  const step = niceStep(hi - lo, targetTicks);
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function decadeTicks(lo: number, hi: number): number[] {
  const first = Math.ceil(Math.log10(lo) - 1e-12);
  const last = Math.floor(Math.log10(hi) + 1e-12);
  const span = last - first;
  const step = span > 10 ? Math.ceil(span / 10) : 1;
  const ticks: number[] = [];
  for (let e = first; e <= last; e += step) ticks.push(Math.pow(10, e));
  return ticks;
}

function tickLabel(value: number, log: boolean): string {
  if (log) {
    const e = Math.round(Math.log10(value));
    return e === 0 ? "1" : `1e${e}`;
  }
  const rounded = Math.round(value * 1e9) / 1e9;
  return String(rounded);
}

function escapeXml(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function polyline(curve: Curve, color: string, sx: (x: number) => number,
                  sy: (y: number) => number): string {
  const points = curve.points.map((p) => `${px(sx(p.x))},${px(sy(p.y))}`).join(" ");
  return `<polyline fill="none" stroke="${color}" stroke-width="1.8" points="${points}"/>`;
}

export function renderSvg(spec: PlotSpec): string {
  const sx = xScale(spec);
  const sy = yScale(spec);
  const plotRight = WIDTH - MARGIN.right;
  const plotBottom = HEIGHT - MARGIN.bottom;
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="26" text-anchor="middle" font-size="16">` +
      `${escapeXml(spec.title)}</text>`,
  );

  const xTicks = linearTicks(spec.xRange[0], spec.xRange[1]);
  const yTicks = spec.yScale === "log"
    ? decadeTicks(spec.yRange[0], spec.yRange[1])
    : linearTicks(spec.yRange[0], spec.yRange[1]);

  for (const t of xTicks) {
    const x = px(sx(t));
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${plotBottom}" ` +
        `stroke="#dddddd" stroke-width="0.6"/>`,
    );
    parts.push(
      `<text x="${x}" y="${plotBottom + 18}" text-anchor="middle" font-size="11">` +
        `${tickLabel(t, false)}</text>`,
    );
  }
  for (const t of yTicks) {
    const y = px(sy(t));
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${plotRight}" y2="${y}" ` +
        `stroke="#dddddd" stroke-width="0.6"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y}" text-anchor="end" dominant-baseline="middle" ` +
        `font-size="11">${tickLabel(t, spec.yScale === "log")}</text>`,
    );
  }

  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotRight - MARGIN.left}" ` +
      `height="${plotBottom - MARGIN.top}" fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${(MARGIN.left + plotRight) / 2}" y="${HEIGHT - 14}" text-anchor="middle" ` +
      `font-size="13">${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="20" y="${(MARGIN.top + plotBottom) / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 20 ${(MARGIN.top + plotBottom) / 2})">` +
      `${escapeXml(spec.yLabel)}</text>`,
  );

  spec.curves.forEach((curve, i) => {
    parts.push(polyline(curve, PALETTE[i % PALETTE.length], sx, sy));
  });

  const legendX = MARGIN.left + 12;
  spec.curves.forEach((curve, i) => {
    const y = MARGIN.top + 16 + i * 18;
    const color = PALETTE[i % PALETTE.length];
    parts.push(
      `<line x1="${legendX}" y1="${y - 4}" x2="${legendX + 24}" y2="${y - 4}" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
    parts.push(
      `<text x="${legendX + 30}" y="${y}" font-size="12">${escapeXml(curve.label)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
