/**
 * The Monte-Carlo-dropout export job: render suppositions, run N stochastic
 * passes per input row, extract the designated hidden layer, map scores to
 * labels with the toolkit's rules, and write a record file the sple loader
 * accepts unchanged.
 */

import { EntailmentEncoder, resolveModel } from "./model.js";
import { RecordRow, writeRecords } from "./records.js";
import { mixPassSeed, splitmix64 } from "./rng.js";
import { Triple, binaryLabel, normalizedEntailVector, rankMulticlass } from "./scores.js";
import { SuppositionTemplate, buildSupposition, resolveTemplate } from "./templates.js";
import { InputRow, readTsv } from "./tsv.js";

export interface ExportJob {
  model: string;
  task: string;
  input: string;
  nPasses: number;
  dropoutRate: number;
  layerFromTop: number;
  pool: "mean" | "cls";
  baseSeed: bigint;
  out: string;
  format: "jsonl" | "binary";
  templates?: string;
  /** label descriptions; a non-empty list switches to multi-class ranking */
  labelTexts?: string[];
  rankRenormalized?: boolean;
  /** also write a single-pass dropout-free file here (edit fallback source) */
  detOut?: string;
}

export interface RowError {
  sampleId: number;
  error: string;
}

export interface ExportResult {
  written: number;
  skipped: RowError[];
  out: string;
}

interface PassOutput {
  label: number;
  scores: number[];
  embedding: number[];
}

function runPass(
  encoder: EntailmentEncoder,
  template: SuppositionTemplate,
  row: InputRow,
  job: ExportJob,
  passSeed: bigint,
  stochastic: boolean,
): PassOutput {
  const labelTexts = job.labelTexts ?? [];
  if (labelTexts.length === 0) {
    const supposition = buildSupposition(template, row.fields);
    const result = encoder.forward(supposition, {
      stochastic,
      passSeed,
      dropoutRate: job.dropoutRate,
    });
    return {
      label: binaryLabel(result.scores),
      scores: [...result.scores],
      embedding: encoder.extract(result, job.layerFromTop, job.pool),
    };
  }
  const triples: Triple[] = [];
  const embeddings: number[][] = [];
  labelTexts.forEach((labelText, c) => {
    const supposition = buildSupposition(template, { ...row.fields, label_text: labelText });
    const result = encoder.forward(supposition, {
      stochastic,
      passSeed: splitmix64(passSeed ^ BigInt(c)),
      dropoutRate: job.dropoutRate,
    });
    triples.push(result.scores);
    embeddings.push(encoder.extract(result, job.layerFromTop, job.pool));
  });
  const winner = rankMulticlass(triples, job.rankRenormalized ?? false);
  return {
    label: winner,
    scores: normalizedEntailVector(triples),
    embedding: embeddings[winner],
  };
}

export function exportMcDropout(job: ExportJob): ExportResult {
  const encoder = resolveModel(job.model);
  const template = resolveTemplate(job.task, job.templates);
  const inputRows = readTsv(job.input);
  if (job.nPasses < 1) throw new Error("n_passes must be >= 1");
  if (job.dropoutRate < 0 || job.dropoutRate >= 1) {
    throw new Error("dropout rate must lie in [0, 1)");
  }

  const rows: RecordRow[] = [];
  const detRows: RecordRow[] = [];
  const skipped: RowError[] = [];
  let eDim = -1;
  let nClasses = -1;
  let written = 0;

  for (const row of inputRows) {
    try {
      const perPass: PassOutput[] = [];
      for (let pass = 0; pass < job.nPasses; pass++) {
        const seed = mixPassSeed(job.baseSeed, BigInt(row.sampleId), BigInt(pass));
        perPass.push(runPass(encoder, template, row, job, seed, true));
      }
      const det = job.detOut
        ? runPass(encoder, template, row, job, 0n, false)
        : undefined;
      for (const [pass, out] of perPass.entries()) {
        if (eDim === -1) {
          eDim = out.embedding.length;
          nClasses = out.scores.length;
        }
        rows.push({
          sampleId: row.sampleId,
          pass,
          label: out.label,
          scores: out.scores,
          embedding: out.embedding,
        });
      }
      if (det) {
        detRows.push({
          sampleId: row.sampleId,
          pass: 0,
          label: det.label,
          scores: det.scores,
          embedding: det.embedding,
        });
      }
      written += 1;
    } catch (err) {
      skipped.push({ sampleId: row.sampleId, error: String(err) });
    }
  }

  if (written === 0) {
    const detail = skipped.map((s) => `  row ${s.sampleId}: ${s.error}`).join("\n");
    throw new Error(`every input row failed:\n${detail}`);
  }

  const meta = { m: written, n: job.nPasses, eDim, nClasses };
  writeRecords(rows, meta, job.out, job.format);
  if (job.detOut) {
    writeRecords(detRows, { ...meta, n: 1 }, job.detOut, job.format);
  }
  return { written, skipped, out: job.out };
}
