#!/usr/bin/env node
// render_figure <fig-id> --csv PATH [--csv PATH ...] --out PATH
//
// Reads cohmdi sweep CSVs and writes one SVG.  The output file is only
// written after the figure builds, so schema or data errors never leave a
// partial image behind.
import { readFileSync, realpathSync, writeFileSync } from "fs";
import { fileURLToPath } from "url";

import { CsvSchemaError, parseSweepCsv, SweepRow } from "./csv.js";
import { buildFigure, FIGURE_IDS, FigureId } from "./figure.js";
import { renderSvg } from "./svg.js";

export interface CliArgs {
  figure: FigureId;
  csvPaths: string[];
  outPath: string;
}

export function parseArgs(argv: string[]): CliArgs {
  if (argv.length === 0) {
    throw new UsageError("missing figure id");
  }
  const figure = argv[0] as FigureId;
  if (!FIGURE_IDS.includes(figure)) {
    throw new UsageError(
      `unknown figure id ${JSON.stringify(argv[0])}; expected one of ${FIGURE_IDS.join(", ")}`,
    );
  }
  const csvPaths: string[] = [];
  let outPath: string | undefined;
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    if (arg === "--csv") {
      if (i + 1 >= argv.length) throw new UsageError("--csv needs a path");
      csvPaths.push(argv[++i]);
    } else if (arg === "--out") {
      if (i + 1 >= argv.length) throw new UsageError("--out needs a path");
      outPath = argv[++i];
    } else {
      throw new UsageError(`unknown argument ${JSON.stringify(arg)}`);
    }
  }
  if (csvPaths.length === 0) throw new UsageError("at least one --csv is required");
  if (!outPath) throw new UsageError("--out is required");
  return { figure, csvPaths, outPath };
}

export class UsageError extends Error {}

export function renderFigureFile(figure: FigureId, csvPaths: string[],
                                 outPath: string): void {
  const rowSets: SweepRow[][] = csvPaths.map((path) =>
    parseSweepCsv(readFileSync(path, "utf8"), path),
  );
  const spec = buildFigure(figure, rowSets);
  writeFileSync(outPath, renderSvg(spec));
}

export function main(argv: string[]): number {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    console.error("usage: render_figure <fig2|fig_a3|fig_a4> --csv PATH [--csv PATH] --out PATH");
    return 2;
  }
  try {
    renderFigureFile(args.figure, args.csvPaths, args.outPath);
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      console.error(`schema error: ${err.message}`);
    } else {
      console.error(`error: ${(err as Error).message}`);
    }
    return 1;
  }
  console.log(`wrote ${args.outPath} (${args.figure}, ${args.csvPaths.length} csv file(s))`);
  return 0;
}

function isDirectRun(): boolean {
  if (!process.argv[1]) return false;
  try {
    return fileURLToPath(import.meta.url) === realpathSync(process.argv[1]);
  } catch {
    return false;
  }
}

if (isDirectRun()) {
  process.exit(main(process.argv.slice(2)));
}
