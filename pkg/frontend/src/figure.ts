// Turns sweep rows into a plot specification (curves + axes), one builder
// per figure id.  Rendering consumes only this structure, so re-running on
// the same CSV reproduces the identical plotted data.
import { SweepRow } from "./csv.js";

export type FigureId = "fig2" | "fig_a3" | "fig_a4";

export const FIGURE_IDS: FigureId[] = ["fig2", "fig_a3", "fig_a4"];

export interface Point {
  x: number;
  y: number;
}

export interface Curve {
  label: string;
  points: Point[];
}

export interface PlotSpec {
  figure: FigureId;
  title: string;
  xLabel: string;
  yLabel: string;
  yScale: "log" | "linear";
  curves: Curve[];
  xRange: [number, number];
  yRange: [number, number];
}

function formatNumber(value: number): string {
  if (value === 0) return "0";
  const abs = Math.abs(value);
  if (abs >= 1e-3 && abs < 1e4) return String(value);
  return value.toExponential().replace("e+", "e");
}

function groupBy<K>(rows: SweepRow[], key: (row: SweepRow) => K): Map<K, SweepRow[]> {
  const groups = new Map<K, SweepRow[]>();
  for (const row of rows) {
    const k = key(row);
    const bucket = groups.get(k);
    if (bucket) bucket.push(row);
    else groups.set(k, [row]);
  }
  return groups;
}

function sortedByLoss(rows: SweepRow[]): SweepRow[] {
  return [...rows].sort((a, b) => a.loss_db - b.loss_db);
}

/** Rows that belong on a curve: placeholder rows are excluded. */
function okRows(rows: SweepRow[]): SweepRow[] {
  return rows.filter((row) => row.flag === "ok");
}

function buildCurves(
  rowSets: SweepRow[][],
  keyOf: (row: SweepRow) => string,
  labelOf: (row: SweepRow) => string,
  yOf: (row: SweepRow) => number,
  omitNonPositive: boolean,
): Curve[] {
  const curves: Curve[] = [];
  for (const rows of rowSets) {
    for (const [, group] of groupBy(okRows(rows), keyOf)) {
      let points = sortedByLoss(group).map((row) => ({ x: row.loss_db, y: yOf(row) }));
      if (omitNonPositive) points = points.filter((p) => p.y > 0);
      if (points.length > 0) curves.push({ label: labelOf(group[0]), points });
    }
  }
  if (curves.length === 0) {
    throw new Error("no plottable rows (every row filtered out or non-positive)");
  }
  return curves;
}

function ranges(curves: Curve[], yScale: "log" | "linear"): {
  x: [number, number];
  y: [number, number];
} {
  const xs = curves.flatMap((c) => c.points.map((p) => p.x));
  const ys = curves.flatMap((c) => c.points.map((p) => p.y));
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yScale === "log") {
    yMin = Math.pow(10, Math.floor(Math.log10(yMin)));
    yMax = Math.pow(10, Math.ceil(Math.log10(yMax)));
  } else {
    yMin = 0;
    yMax = yMax * 1.05;
  }
  return { x: [xMin, xMax === xMin ? xMin + 1 : xMax], y: [yMin, yMax] };
}

export function buildFigure(figure: FigureId, rowSets: SweepRow[][]): PlotSpec {
  let curves: Curve[];
  let title: string;
  let yLabel: string;
  let yScale: "log" | "linear";
  switch (figure) {
    case "fig2":
      curves = buildCurves(
        rowSets,
        (row) => row.epsilonKey,
        (row) => `eps = ${formatNumber(row.epsilon)}`,
        (row) => row.R,
        true,
      );
      title = "Secret key rate vs overall system loss";
      yLabel = "secret key rate R";
      yScale = "log";
      break;
    case "fig_a3":
      curves = buildCurves(
        rowSets,
        (row) => row.epsilonKey,
        (row) => `eps = ${formatNumber(row.epsilon)}`,
        (row) => row.alpha_opt,
        false,
      );
      title = "Optimal signal amplitude vs overall system loss";
      yLabel = "optimal amplitude";
      yScale = "linear";
      break;
    case "fig_a4":
      curves = buildCurves(
        rowSets,
        (row) => row.gammaSqKey,
        (row) => `third-state intensity ${formatNumber(row.gamma_sq)}`,
        (row) => row.R,
        true,
      );
      title = "Secret key rate: vacuum vs weak third state";
      yLabel = "secret key rate R";
      yScale = "log";
      break;
    default:
      throw new Error(`unknown figure id: ${figure}`);
  }
  const { x, y } = ranges(curves, yScale);
  return {
    figure,
    title,
    xLabel: "overall system loss (dB)",
    yLabel,
    yScale,
    curves,
    xRange: x,
    yRange: y,
  };
}
