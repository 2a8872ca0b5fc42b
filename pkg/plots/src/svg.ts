/** Shared SVG string-building helpers; all output is deterministic. */

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Round to 2 decimals and strip trailing zeros so coordinates are stable. */
export function fmt(v: number): string {
  const r = Math.round(v * 100) / 100;
  // avoid "-0"
  return (Object.is(r, -0) ? 0 : r).toString();
}

/** Short tick label: up to 4 significant digits, exponent form for extremes. */
export function tickLabel(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) return v.toExponential(1);
  return (Math.round(v * 1e4) / 1e4).toString();
}

export function openSvg(width: number, height: number): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n`
  );
}

export function text(
  x: number,
  y: number,
  content: string,
  attrs = ""
): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" ${attrs}>${esc(content)}</text>\n`;
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  attrs: string
): string {
  return `<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" ${attrs}/>\n`;
}
