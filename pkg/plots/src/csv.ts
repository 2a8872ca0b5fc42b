import Papa from "papaparse";

/** One row of the harness summary CSV. */
export interface SummaryRow {
  experiment: string;
  target_param: string;
  proposal: string;
  weight: string;
  M: number;
  metric: string;
  count: number;
  median: number;
  q25: number;
  q75: number;
  q05: number;
  q95: number;
}

export const SUMMARY_COLUMNS = [
  "experiment",
  "target_param",
  "proposal",
  "weight",
  "M",
  "metric",
  "count",
  "median",
  "q25",
  "q75",
  "q05",
  "q95",
] as const;

function toNumber(raw: string): number {
  const t = raw.trim();
  const v = Number.parseFloat(t);
  // quantiles of failed metrics are written as "nan"
  if (Number.isNaN(v) && t.toLowerCase() !== "nan") {
    throw new Error(`not a number: "${raw}"`);
  }
  return v;
}

/** Parse summary CSV text, validating the documented schema. */
export function parseSummaryCsv(text: string): SummaryRow[] {
  const parsed = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`summary CSV parse error: ${first.message} (row ${first.row})`);
  }
  const fields = parsed.meta.fields ?? [];
  for (const col of SUMMARY_COLUMNS) {
    if (!fields.includes(col)) {
      throw new Error(
        `summary CSV missing column "${col}"; found: ${fields.join(", ")}`
      );
    }
  }
  return parsed.data.map((rec, idx) => {
    try {
      return {
        experiment: rec.experiment,
        target_param: rec.target_param,
        proposal: rec.proposal,
        weight: rec.weight,
        M: Math.trunc(toNumber(rec.M)),
        metric: rec.metric,
        count: Math.trunc(toNumber(rec.count)),
        median: toNumber(rec.median),
        q25: toNumber(rec.q25),
        q75: toNumber(rec.q75),
        q05: toNumber(rec.q05),
        q95: toNumber(rec.q95),
      };
    } catch (err) {
      throw new Error(`summary CSV row ${idx + 2}: ${(err as Error).message}`);
    }
  });
}
