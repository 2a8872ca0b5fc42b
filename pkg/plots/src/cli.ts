#!/usr/bin/env node
import { readFileSync, writeFileSync } from "node:fs";
import { parseArgs } from "node:util";
import { parseSummaryCsv } from "./csv.js";
import { renderIntervalFigure, type FacetField, type XField } from "./intervals.js";
import { renderBananaContourGrid } from "./contours.js";

const USAGE = `usage:
  mtm-plots intervals <summary.csv> -o out.svg [--metric NAME] [--x M|target_param]
        [--rows weight|proposal|target_param] [--cols weight|proposal|target_param]
        [--levels 50,90] [--param VALUE] [--experiment NAME]
  mtm-plots contours -o out.svg [--log10b -2,-1.5,-1,-0.5] [--grid N]
`;

function fail(message: string): never {
  process.stderr.write(`mtm-plots: error: ${message}\n`);
  process.exit(2);
}

function facetField(raw: string, flag: string): FacetField {
  if (raw === "weight" || raw === "proposal" || raw === "target_param") return raw;
  return fail(`${flag} must be weight, proposal, or target_param (got "${raw}")`);
}

function main(argv: string[]): number {
  const { values, positionals } = parseArgs({
    args: argv,
    allowPositionals: true,
    options: {
      output: { type: "string", short: "o" },
      metric: { type: "string", default: "mess" },
      x: { type: "string", default: "M" },
      rows: { type: "string", default: "weight" },
      cols: { type: "string", default: "proposal" },
      levels: { type: "string", default: "50,90" },
      param: { type: "string" },
      experiment: { type: "string" },
      log10b: { type: "string", default: "-2,-1.5,-1,-0.5" },
      grid: { type: "string", default: "121" },
      help: { type: "boolean", short: "h", default: false },
    },
  });
  if (values.help || positionals.length === 0) {
    process.stdout.write(USAGE);
    return values.help ? 0 : 2;
  }
  const command = positionals[0];
  if (!values.output) fail("-o/--output is required");
  const output = values.output;

  if (command === "intervals") {
    if (positionals.length !== 2) fail("intervals needs exactly one CSV path");
    const rows = parseSummaryCsv(readFileSync(positionals[1], "utf8"));
    const levels = values.levels.split(",").map((s) => {
      const v = Number.parseInt(s.trim(), 10);
      if (v !== 50 && v !== 90) fail(`--levels entries must be 50 or 90 (got "${s}")`);
      return v as 50 | 90;
    });
    if (values.x !== "M" && values.x !== "target_param") {
      fail(`--x must be M or target_param (got "${values.x}")`);
    }
    const svg = renderIntervalFigure(rows, {
      metric: values.metric,
      facetRows: facetField(values.rows, "--rows"),
      facetCols: facetField(values.cols, "--cols"),
      x: values.x as XField,
      levels,
      param: values.param,
      experiment: values.experiment,
    });
    writeFileSync(output, svg);
    process.stdout.write(`wrote ${output}\n`);
    return 0;
  }

  if (command === "contours") {
    const bValues = values.log10b.split(",").map((s) => {
      const e = Number.parseFloat(s.trim());
      if (Number.isNaN(e)) fail(`--log10b entries must be numbers (got "${s}")`);
      return 10 ** e;
    });
    const n = Number.parseInt(values.grid, 10);
    if (Number.isNaN(n)) fail(`--grid must be an integer (got "${values.grid}")`);
    const svg = renderBananaContourGrid({ bValues, n });
    writeFileSync(output, svg);
    process.stdout.write(`wrote ${output}\n`);
    return 0;
  }

  return fail(`unknown command "${command}"\n${USAGE}`);
}

try {
  process.exit(main(process.argv.slice(2)));
} catch (err) {
  fail((err as Error).message);
}
