import { scaleLinear } from "d3";
import type { SummaryRow } from "./csv.js";
import { esc, fmt, line, openSvg, text, tickLabel } from "./svg.js";

export type FacetField = "weight" | "proposal" | "target_param";
export type XField = "M" | "target_param";

/** What to draw; facet defaults follow the summary-figure convention. */
export interface FigureSpec {
  metric: string;
  facetRows?: FacetField;
  facetCols?: FacetField;
  x?: XField;
  /** Which interval bars to draw: 50 uses q25..q75, 90 uses q05..q95. */
  levels?: Array<50 | 90>;
  /** Keep only rows whose target_param equals this value. */
  param?: string;
  /** Keep only rows from this experiment. */
  experiment?: string;
}

const PANEL_W = 170;
const PANEL_H = 125;
const GAP = 8;
const LEFT = 64;
const TOP = 48;
const BOTTOM = 44;
const RIGHT_STRIP = 104;

const PROPOSAL_ORDER = ["hom-full", "het-full", "hom-cw", "het-cw"];
const WEIGHT_ORDER = ["constant", "proportional", "importance", "jump-distance", "locally-balanced"];

function categoryRank(value: string, order: string[]): number {
  const idx = order.findIndex((o) => value === o || value.startsWith(o + "("));
  return idx === -1 ? order.length : idx;
}

function categories(values: string[], order: string[]): string[] {
  const uniq = [...new Set(values)];
  uniq.sort((a, b) => {
    const ra = categoryRank(a, order);
    const rb = categoryRank(b, order);
    return ra !== rb ? ra - rb : a < b ? -1 : a > b ? 1 : 0;
  });
  return uniq;
}

function fieldOrder(field: FacetField): string[] {
  if (field === "weight") return WEIGHT_ORDER;
  if (field === "proposal") return PROPOSAL_ORDER;
  return [];
}

function xValue(row: SummaryRow, x: XField): number {
  return x === "M" ? row.M : Number.parseFloat(row.target_param);
}

/**
 * Render the faceted interval figure: one panel per (row category, column
 * category), a median point per x value with vertical interval bars.
 * Returns the SVG document as a string.
 */
export function renderIntervalFigure(rows: SummaryRow[], spec: FigureSpec): string {
  const facetRows = spec.facetRows ?? "weight";
  const facetCols = spec.facetCols ?? "proposal";
  const xField = spec.x ?? "M";
  const levels = spec.levels ?? [50, 90];

  let data = rows.filter((r) => r.metric === spec.metric);
  if (rows.length > 0 && data.length === 0) {
    const metrics = [...new Set(rows.map((r) => r.metric))].sort();
    throw new Error(
      `metric "${spec.metric}" not present; CSV has: ${metrics.join(", ")}`
    );
  }
  if (spec.experiment !== undefined) {
    data = data.filter((r) => r.experiment === spec.experiment);
  }
  if (spec.param !== undefined) {
    data = data.filter((r) => r.target_param === spec.param);
  }
  if (xField === "M") {
    const params = [...new Set(data.map((r) => r.target_param))].sort();
    if (params.length > 1) {
      throw new Error(
        `multiple target_param values (${params.join(", ")}); ` +
          `pass param to select one or facet by target_param`
      );
    }
  }

  const rowCats = categories(data.map((r) => r[facetRows]), fieldOrder(facetRows));
  const colCats = categories(data.map((r) => r[facetCols]), fieldOrder(facetCols));
  if (rowCats.length === 0) rowCats.push("(no data)");
  if (colCats.length === 0) colCats.push("(no data)");

  const width = LEFT + colCats.length * (PANEL_W + GAP) - GAP + RIGHT_STRIP;
  const height = TOP + rowCats.length * (PANEL_H + GAP) - GAP + BOTTOM;

  // shared scales across every panel
  const xs = data.map((r) => xValue(r, xField)).filter(Number.isFinite);
  const ys: number[] = [];
  for (const r of data) {
    for (const v of [r.median, r.q25, r.q75, ...(levels.includes(90) ? [r.q05, r.q95] : [])]) {
      if (Number.isFinite(v)) ys.push(v);
    }
  }
  const xDomain = extentWithPad(xs, 0.06);
  const yDomain = extentWithPad(ys, 0.06);
  const xScale = scaleLinear().domain(xDomain).range([0, PANEL_W]);
  const yScale = scaleLinear().domain(yDomain).range([PANEL_H, 0]);
  const xTicks = xField === "M" ? [...new Set(xs)].sort((a, b) => a - b) : xScale.ticks(4);
  const yTicks = yScale.ticks(4);

  let svg = openSvg(width, height);
  const title = figureTitle(data, spec);
  svg += text(LEFT, 20, title, 'font-size="13" font-weight="bold"');

  for (let ci = 0; ci < colCats.length; ci++) {
    const px = LEFT + ci * (PANEL_W + GAP);
    svg += text(px + PANEL_W / 2, TOP - 8, colCats[ci], 'font-size="11" text-anchor="middle"');
  }

  for (let ri = 0; ri < rowCats.length; ri++) {
    const py = TOP + ri * (PANEL_H + GAP);
    svg += text(
      LEFT + colCats.length * (PANEL_W + GAP) - GAP + 8,
      py + PANEL_H / 2 + 4,
      rowCats[ri],
      'font-size="11"'
    );
    for (const t of yTicks) {
      svg += text(LEFT - 6, py + yScale(t) + 3, tickLabel(t), 'font-size="9" text-anchor="end"');
    }
    for (let ci = 0; ci < colCats.length; ci++) {
      const px = LEFT + ci * (PANEL_W + GAP);
      svg += renderPanel(
        data.filter((r) => r[facetRows] === rowCats[ri] && r[facetCols] === colCats[ci]),
        px, py, xField, levels, xScale, yScale,
        esc(rowCats[ri]) + "|" + esc(colCats[ci])
      );
      if (ri === rowCats.length - 1) {
        for (const t of xTicks) {
          svg += text(px + xScale(t), py + PANEL_H + 14, tickLabel(t), 'font-size="9" text-anchor="middle"');
        }
        svg += text(px + PANEL_W / 2, py + PANEL_H + 30, xField, 'font-size="10" text-anchor="middle"');
      }
    }
  }
  svg += text(14, TOP + (rowCats.length * (PANEL_H + GAP) - GAP) / 2, spec.metric,
    'font-size="10" text-anchor="middle" transform="rotate(-90 14 ' +
      fmt(TOP + (rowCats.length * (PANEL_H + GAP) - GAP) / 2) + ')"');
  return svg + "</svg>\n";
}

function figureTitle(data: SummaryRow[], spec: FigureSpec): string {
  const experiments = [...new Set(data.map((r) => r.experiment))].sort();
  const head = experiments.length === 1 ? experiments[0] + ": " : "";
  const param = spec.param !== undefined ? ` (param ${spec.param})` : "";
  return `${head}${spec.metric} by ${spec.x ?? "M"}${param}`;
}

function extentWithPad(values: number[], frac: number): [number, number] {
  if (values.length === 0) return [0, 1];
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = (hi - lo) * frac;
  return [lo - pad, hi + pad];
}

function renderPanel(
  rows: SummaryRow[],
  px: number,
  py: number,
  xField: XField,
  levels: Array<50 | 90>,
  xScale: (v: number) => number,
  yScale: (v: number) => number,
  facetId: string
): string {
  let out = `<g data-facet="${facetId}">\n`;
  out += `<rect x="${fmt(px)}" y="${fmt(py)}" width="${PANEL_W}" height="${PANEL_H}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;
  const sorted = [...rows].sort((a, b) => xValue(a, xField) - xValue(b, xField));
  for (const r of sorted) {
    const xv = xValue(r, xField);
    if (!Number.isFinite(xv)) continue;
    const cx = px + xScale(xv);
    if (levels.includes(90) && Number.isFinite(r.q05) && Number.isFinite(r.q95)) {
      out += line(cx, py + yScale(r.q05), cx, py + yScale(r.q95), 'stroke="#7aa6d6" stroke-width="1"');
    }
    if (levels.includes(50) && Number.isFinite(r.q25) && Number.isFinite(r.q75)) {
      out += line(cx, py + yScale(r.q25), cx, py + yScale(r.q75), 'stroke="#2166ac" stroke-width="2.5"');
    }
    if (Number.isFinite(r.median)) {
      out += `<circle cx="${fmt(cx)}" cy="${fmt(py + yScale(r.median))}" r="2.6" fill="#14365c"/>\n`;
    }
  }
  return out + "</g>\n";
}
