import { describe, expect, it } from "vitest";
import { parseSummaryCsv, SUMMARY_COLUMNS } from "../src/csv.js";

const HEADER = SUMMARY_COLUMNS.join(",");

describe("parseSummaryCsv", () => {
  it("parses rows and coerces numeric fields", () => {
    const text = [
      HEADER,
      "banana,0.1,hom-full,constant,5,mess,8,412.5,390.0,433.1,360.2,441.9",
      "banana,0.1,het-cw,importance,20,mess,8,512.5,490.0,533.1,460.2,541.9",
    ].join("\n");
    const rows = parseSummaryCsv(text);
    expect(rows).toHaveLength(2);
    expect(rows[0].experiment).toBe("banana");
    expect(rows[0].M).toBe(5);
    expect(rows[0].median).toBeCloseTo(412.5, 12);
    expect(rows[1].proposal).toBe("het-cw");
    expect(rows[1].q95).toBeCloseTo(541.9, 12);
  });

  it("accepts nan cells from failed runs", () => {
    const text = [
      HEADER,
      "banana,0.1,hom-cw,constant,100,mess,8,nan,nan,nan,nan,nan",
    ].join("\n");
    const rows = parseSummaryCsv(text);
    expect(rows[0].median).toBeNaN();
  });

  it("rejects a file with a missing column", () => {
    const cols = SUMMARY_COLUMNS.filter((c) => c !== "q25");
    const text = [cols.join(","), "banana,0.1,hom-full,constant,5,mess,8,1,2,3,4"].join("\n");
    expect(() => parseSummaryCsv(text)).toThrow(/missing column "q25"/);
  });

  it("rejects non-numeric cells with the row number", () => {
    const text = [
      HEADER,
      "banana,0.1,hom-full,constant,5,mess,8,412.5,390.0,433.1,360.2,441.9",
      "banana,0.1,hom-full,constant,ten,mess,8,1,1,1,1,1",
    ].join("\n");
    // rows are numbered as file lines, header included
    expect(() => parseSummaryCsv(text)).toThrow(/row 3.*"ten"/);
  });

  it("ignores trailing blank lines", () => {
    const text = [
      HEADER,
      "gauss,30,het-full,proportional,20,mess,8,99.5,90.0,110.0,80.0,120.0",
      "",
      "",
    ].join("\n");
    expect(parseSummaryCsv(text)).toHaveLength(1);
  });
});
