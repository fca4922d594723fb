/**
 * Record-file writers in the sple toolkit's two formats.
 *
 * JSONL: header {"magic":"SPLE-JSONL","version":1,"m":M,"n":N,"e_dim":E,
 * "n_classes":K} then one {sample_id, pass, label, scores, embedding}
 * object per line. Binary (little-endian): magic "SPLE", version u32=1,
 * M u64, N u32, e_dim u32, n_classes u32, then M*N frames of
 * sample_id u64, pass u32, label i32, K float32, E float32.
 *
 * All reals are rounded through float32 before serialization, matching the
 * on-disk precision either way.
 */

import { writeFileSync } from "node:fs";

export interface RecordRow {
  sampleId: number;
  pass: number;
  label: number;
  scores: number[];
  embedding: number[];
}

export interface RecordSetMeta {
  m: number;
  n: number;
  eDim: number;
  nClasses: number;
}

function canonical(rows: RecordRow[]): RecordRow[] {
  return [...rows].sort((a, b) => a.sampleId - b.sampleId || a.pass - b.pass);
}

function checkShape(rows: RecordRow[], meta: RecordSetMeta): void {
  if (rows.length !== meta.m * meta.n) {
    throw new Error(`expected ${meta.m * meta.n} records, have ${rows.length}`);
  }
  for (const row of rows) {
    if (row.scores.length !== meta.nClasses) {
      throw new Error(`record (${row.sampleId},${row.pass}): score length mismatch`);
    }
    if (row.embedding.length !== meta.eDim) {
      throw new Error(`record (${row.sampleId},${row.pass}): embedding length mismatch`);
    }
  }
}

export function writeRecordsJsonl(rows: RecordRow[], meta: RecordSetMeta, path: string): void {
  checkShape(rows, meta);
  const lines = [
    JSON.stringify({
      magic: "SPLE-JSONL",
      version: 1,
      m: meta.m,
      n: meta.n,
      e_dim: meta.eDim,
      n_classes: meta.nClasses,
    }),
  ];
  for (const row of canonical(rows)) {
    lines.push(
      JSON.stringify({
        sample_id: row.sampleId,
        pass: row.pass,
        label: row.label,
        scores: row.scores.map(Math.fround),
        embedding: row.embedding.map(Math.fround),
      }),
    );
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

export function writeRecordsBinary(rows: RecordRow[], meta: RecordSetMeta, path: string): void {
  checkShape(rows, meta);
  const headerSize = 4 + 4 + 8 + 4 + 4 + 4;
  const frameSize = 8 + 4 + 4 + 4 * (meta.nClasses + meta.eDim);
  const buf = Buffer.alloc(headerSize + rows.length * frameSize);
  buf.write("SPLE", 0, "ascii");
  buf.writeUInt32LE(1, 4);
  buf.writeBigUInt64LE(BigInt(meta.m), 8);
  buf.writeUInt32LE(meta.n, 16);
  buf.writeUInt32LE(meta.eDim, 20);
  buf.writeUInt32LE(meta.nClasses, 24);
  let off = headerSize;
  for (const row of canonical(rows)) {
    buf.writeBigUInt64LE(BigInt(row.sampleId), off);
    off += 8;
    buf.writeUInt32LE(row.pass, off);
    off += 4;
    buf.writeInt32LE(row.label, off);
    off += 4;
    for (const v of row.scores) {
      buf.writeFloatLE(v, off);
      off += 4;
    }
    for (const v of row.embedding) {
      buf.writeFloatLE(v, off);
      off += 4;
    }
  }
  writeFileSync(path, buf);
}

export function writeRecords(
  rows: RecordRow[],
  meta: RecordSetMeta,
  path: string,
  format: "jsonl" | "binary",
): void {
  if (format === "binary") writeRecordsBinary(rows, meta, path);
  else writeRecordsJsonl(rows, meta, path);
}
