/**
 * CSV writer matching the analysis-table conventions on the Python side:
 * sorted '# key=value' comment lines, a header, integers bare, floats at
 * fixed 10-decimal precision, LF newlines. Re-emission is byte-identical.
 */

import * as fs from "fs";

const FLOAT_DIGITS = 10;

function formatCell(value: number | string): string {
  if (typeof value === "number") {
    return Number.isInteger(value) ? String(value) : value.toFixed(FLOAT_DIGITS);
  }
  if (/[",\n]/.test(value)) {
    return '"' + value.replace(/"/g, '""') + '"';
  }
  return value;
}

export function writeCsv(
  path: string,
  header: string[],
  rows: Array<Array<number | string>>,
  metadata?: Record<string, string>
): void {
  const lines: string[] = [];
  for (const key of Object.keys(metadata ?? {}).sort()) {
    lines.push(`# ${key}=${metadata![key]}`);
  }
  lines.push(header.join(","));
  for (const row of rows) {
    lines.push(row.map(formatCell).join(","));
  }
  fs.writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}

/** Floats must render at fixed precision even when integral. */
export function fixed(value: number): string {
  return value.toFixed(FLOAT_DIGITS);
}
