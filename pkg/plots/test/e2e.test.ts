import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { parseSummaryCsv } from "../src/csv.js";
import { renderIntervalFigure } from "../src/intervals.js";
import { renderBananaContourGrid } from "../src/contours.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = join(here, "fixtures", "banana_desk_summary.csv");

describe("desk-scale summary round trip", () => {
  const rows = parseSummaryCsv(readFileSync(fixture, "utf8"));

  it("parses the harness summary as written", () => {
    expect(rows.length).toBeGreaterThan(100);
    const metrics = new Set(rows.map((r) => r.metric));
    expect(metrics.has("mess")).toBe(true);
  });

  it("renders the faceted interval figure with a 4x4 grid", () => {
    const svg = renderIntervalFigure(rows, { metric: "mess" });
    expect((svg.match(/data-facet="/g) ?? [])).toHaveLength(16);
    expect(svg.startsWith("<svg")).toBe(true);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
    // every panel that has data draws at least its medians
    expect((svg.match(/<circle/g) ?? []).length).toBeGreaterThan(40);
  });

  it("renders the contour grid alongside without error", () => {
    const svg = renderBananaContourGrid();
    expect((svg.match(/data-panel="/g) ?? [])).toHaveLength(4);
    expect(svg.trimEnd().endsWith("</svg>")).toBe(true);
  });
});
