import { contours } from "d3";
import { fmt, openSvg, text } from "./svg.js";

/**
 * Unnormalized log density of the first two banana coordinates: a wide
 * Gaussian in x1 bent along the parabola x2 = B (100 - x1^2).
 */
export function bananaLogDensity2d(x1: number, x2: number, B: number): number {
  const bent = x2 + B * x1 * x1 - 100 * B;
  return -(x1 * x1) / 200 - 0.5 * bent * bent;
}

export interface ContourGridSpec {
  bValues?: number[];
  /** Grid resolution per side. */
  n?: number;
  /** Log-density drops below the panel maximum (0) to contour at. */
  levels?: number[];
}

const DEFAULT_LOG10B = [-2, -1.5, -1, -0.5];
const DEFAULT_LEVELS = [-12.5, -8, -4.5, -2, -0.5];

const PANEL_W = 190;
const PANEL_H = 170;
const GAP = 14;
const TOP = 52;
const LEFT = 16;
const BOTTOM = 16;

interface PanelRange {
  x1: [number, number];
  x2: [number, number];
}

/** Axis window containing the crescent's ridge plus a few unit sds. */
export function panelRange(B: number): PanelRange {
  const x1Max = 28;
  const hi = 100 * B + 4;
  const lo = B * (100 - x1Max * x1Max) - 4;
  return { x1: [-x1Max, x1Max], x2: [lo, hi] };
}

/** Row-major grid of log densities; row 0 holds the largest x2 values. */
export function contourGrid(B: number, n: number, range: PanelRange): Float64Array {
  const values = new Float64Array(n * n);
  const [x1lo, x1hi] = range.x1;
  const [x2lo, x2hi] = range.x2;
  for (let gy = 0; gy < n; gy++) {
    const x2 = x2hi - ((gy + 0.5) / n) * (x2hi - x2lo);
    for (let gx = 0; gx < n; gx++) {
      const x1 = x1lo + ((gx + 0.5) / n) * (x1hi - x1lo);
      values[gy * n + gx] = bananaLogDensity2d(x1, x2, B);
    }
  }
  return values;
}

/**
 * Render one contour panel per curvature value B. Contour levels sit at
 * fixed drops below the ridge log density, which is 0 for every B.
 */
export function renderBananaContourGrid(spec: ContourGridSpec = {}): string {
  const bValues = spec.bValues ?? DEFAULT_LOG10B.map((e) => 10 ** e);
  const n = spec.n ?? 121;
  const levels = [...(spec.levels ?? DEFAULT_LEVELS)].sort((a, b) => a - b);
  if (bValues.length === 0) throw new Error("need at least one B value");
  if (n < 8) throw new Error("grid resolution too small");

  const width = LEFT + bValues.length * (PANEL_W + GAP) - GAP + LEFT;
  const height = TOP + PANEL_H + BOTTOM;
  let svg = openSvg(width, height);
  svg += text(LEFT, 20, "banana density contours", 'font-size="13" font-weight="bold"');

  const generator = contours().size([n, n]).thresholds(levels);
  for (let k = 0; k < bValues.length; k++) {
    const B = bValues[k];
    const px = LEFT + k * (PANEL_W + GAP);
    const range = panelRange(B);
    const grid = contourGrid(B, n, range);
    const polys = generator(Array.from(grid));

    const label =
      B > 0 && Number.isFinite(Math.log10(B))
        ? `log10 B = ${fmt(Math.log10(B))}`
        : `B = ${fmt(B)}`;
    svg += text(px + PANEL_W / 2, TOP - 8, label, 'font-size="11" text-anchor="middle"');
    svg += `<g data-panel="${k}">\n`;
    svg += `<rect x="${fmt(px)}" y="${fmt(TOP)}" width="${PANEL_W}" height="${PANEL_H}" fill="none" stroke="#888" stroke-width="0.8"/>\n`;
    for (const multi of polys) {
      const path = contourPath(multi.coordinates, n, px, TOP);
      if (path !== "") {
        svg += `<path d="${path}" fill="none" stroke="#2166ac" stroke-width="1"/>\n`;
      }
    }
    svg += "</g>\n";
  }
  return svg + "</svg>\n";
}

function contourPath(
  coordinates: number[][][][],
  n: number,
  px: number,
  py: number
): string {
  const sx = PANEL_W / n;
  const sy = PANEL_H / n;
  let d = "";
  for (const polygon of coordinates) {
    for (const ring of polygon) {
      for (let i = 0; i < ring.length; i++) {
        const gx = px + ring[i][0] * sx;
        const gy = py + ring[i][1] * sy;
        d += `${i === 0 ? "M" : "L"}${fmt(gx)} ${fmt(gy)}`;
      }
      d += "Z";
    }
  }
  return d;
}
