/**
 * Input tables: tab-separated with a header row naming the task fields
 * (p/h, t/q, q1/q2, or x), plus optional sample_id and label_text columns.
 */

import { readFileSync } from "node:fs";

export interface InputRow {
  sampleId: number;
  fields: Record<string, string>;
}

export function readTsv(path: string): InputRow[] {
  const text = readFileSync(path, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  if (lines.length < 2) {
    throw new Error(`${path}: need a header row and at least one data row`);
  }
  const header = lines[0].split("\t").map((h) => h.trim());
  const rows: InputRow[] = [];
  lines.slice(1).forEach((line, i) => {
    const cells = line.split("\t");
    if (cells.length !== header.length) {
      throw new Error(
        `${path}: row ${i + 2} has ${cells.length} cells, header has ${header.length}`,
      );
    }
    const fields: Record<string, string> = {};
    header.forEach((name, j) => {
      fields[name] = cells[j];
    });
    const sampleId = "sample_id" in fields ? Number(fields.sample_id) : i;
    if (!Number.isInteger(sampleId) || sampleId < 0) {
      throw new Error(`${path}: row ${i + 2}: bad sample_id ${fields.sample_id}`);
    }
    rows.push({ sampleId, fields });
  });
  return rows;
}
