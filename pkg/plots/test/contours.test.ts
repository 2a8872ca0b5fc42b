import { describe, expect, it } from "vitest";
import {
  bananaLogDensity2d,
  contourGrid,
  panelRange,
  renderBananaContourGrid,
} from "../src/contours.js";

describe("bananaLogDensity2d", () => {
  it("peaks on the ridge x2 = 100B - B x1^2", () => {
    for (const B of [0.01, 0.1, 0.3]) {
      for (const x1 of [-15, 0, 7]) {
        const ridge = 100 * B - B * x1 * x1;
        const onRidge = bananaLogDensity2d(x1, ridge, B);
        expect(onRidge).toBeCloseTo(-(x1 * x1) / 200, 12);
        expect(bananaLogDensity2d(x1, ridge + 2, B)).toBeLessThan(onRidge);
        expect(bananaLogDensity2d(x1, ridge - 2, B)).toBeLessThan(onRidge);
      }
    }
  });

  it("is symmetric in x1 and elliptical when B = 0", () => {
    expect(bananaLogDensity2d(3, 1, 0)).toBeCloseTo(bananaLogDensity2d(-3, 1, 0), 14);
    expect(bananaLogDensity2d(0, 0, 0)).toBeCloseTo(0, 14);
    expect(bananaLogDensity2d(0, 2, 0)).toBeCloseTo(-2, 14);
  });
});

describe("contourGrid", () => {
  it("mirrors values across the x1 = 0 axis", () => {
    const B = 0.1;
    const n = 40;
    const grid = contourGrid(B, n, panelRange(B));
    for (let gy = 0; gy < n; gy += 7) {
      for (let gx = 0; gx < n / 2; gx++) {
        const left = grid[gy * n + gx];
        const right = grid[gy * n + (n - 1 - gx)];
        expect(right).toBeCloseTo(left, 9);
      }
    }
  });

  it("puts the largest x2 in row zero", () => {
    const B = 0.1;
    const n = 24;
    const range = panelRange(B);
    const grid = contourGrid(B, n, range);
    const mid = Math.floor(n / 2);
    const x1 = range.x1[0] + ((mid + 0.5) / n) * (range.x1[1] - range.x1[0]);
    const [x2lo, x2hi] = range.x2;
    const topX2 = x2hi - (0.5 / n) * (x2hi - x2lo);
    const bottomX2 = x2hi - ((n - 0.5) / n) * (x2hi - x2lo);
    expect(grid[0 * n + mid]).toBeCloseTo(bananaLogDensity2d(x1, topX2, B), 12);
    expect(grid[(n - 1) * n + mid]).toBeCloseTo(bananaLogDensity2d(x1, bottomX2, B), 12);
  });
});

describe("renderBananaContourGrid", () => {
  it("renders one labelled panel per curvature value", () => {
    const svg = renderBananaContourGrid();
    expect((svg.match(/data-panel="/g) ?? [])).toHaveLength(4);
    expect(svg).toContain("log10 B = -2");
    expect(svg).toContain("log10 B = -0.5");
    expect(svg).toContain("<path");
  });

  it("is deterministic", () => {
    expect(renderBananaContourGrid()).toBe(renderBananaContourGrid());
  });

  it("keeps the panel layout when grid resolution changes", () => {
    const coarse = renderBananaContourGrid({ n: 41 });
    const fine = renderBananaContourGrid({ n: 161 });
    const size = (svg: string) => svg.match(/<svg[^>]*>/)![0];
    expect(size(coarse)).toBe(size(fine));
    expect((coarse.match(/data-panel="/g) ?? [])).toHaveLength(4);
    expect((fine.match(/data-panel="/g) ?? [])).toHaveLength(4);
  });

  it("rejects empty or degenerate requests", () => {
    expect(() => renderBananaContourGrid({ bValues: [] })).toThrow(/at least one/);
    expect(() => renderBananaContourGrid({ n: 4 })).toThrow(/resolution/);
  });
});
