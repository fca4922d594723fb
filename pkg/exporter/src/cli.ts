#!/usr/bin/env node
/**
 * Command line for the record exporter.
 *
 *   sple-export --model tiny-entail-v1 --task sst2 --input rows.tsv \
 *       --passes 7 --layer-from-top 4 --out records.bin --format binary
 *
 * A leading "export" token is accepted and ignored, so the documented
 * "export --model ..." form works verbatim. "gen-checkpoint --seed N --out
 * PATH" writes a fresh deterministic encoder checkpoint.
 */

import { parseArgs } from "node:util";

import { exportMcDropout } from "./export.js";
import { generateCheckpoint, writeCheckpoint } from "./model.js";

function fail(message: string): never {
  console.error(`error: ${message}`);
  process.exit(2);
}

function runGenCheckpoint(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      seed: { type: "string", default: "42" },
      dim: { type: "string", default: "24" },
      layers: { type: "string", default: "5" },
      "max-tokens": { type: "string", default: "128" },
      out: { type: "string" },
    },
  });
  if (!values.out) fail("gen-checkpoint needs --out");
  const ckpt = generateCheckpoint(
    BigInt(values.seed!),
    Number(values.dim),
    Number(values.layers),
    Number(values["max-tokens"]),
  );
  writeCheckpoint(ckpt, values.out);
  console.log(`wrote ${values.dim}-dim ${values.layers}-layer checkpoint to ${values.out}`);
}

function runExport(argv: string[]): void {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: "string" },
      task: { type: "string" },
      input: { type: "string" },
      passes: { type: "string", default: "7" },
      dropout: { type: "string", default: "0.1" },
      "layer-from-top": { type: "string", default: "4" },
      pool: { type: "string", default: "mean" },
      seed: { type: "string", default: "0" },
      out: { type: "string" },
      format: { type: "string", default: "binary" },
      templates: { type: "string" },
      "label-texts": { type: "string" },
      "rank-renormalized": { type: "boolean", default: false },
      "det-out": { type: "string" },
    },
  });
  for (const required of ["model", "task", "input", "out"] as const) {
    if (!values[required]) fail(`missing --${required}`);
  }
  const pool = values.pool === "cls" ? "cls" : values.pool === "mean" ? "mean" : null;
  if (!pool) fail(`--pool must be mean or cls, got ${values.pool}`);
  const format =
    values.format === "binary" ? "binary" : values.format === "jsonl" ? "jsonl" : null;
  if (!format) fail(`--format must be jsonl or binary, got ${values.format}`);

  try {
    const result = exportMcDropout({
      model: values.model!,
      task: values.task!,
      input: values.input!,
      nPasses: Number(values.passes),
      dropoutRate: Number(values.dropout),
      layerFromTop: Number(values["layer-from-top"]),
      pool,
      baseSeed: BigInt(values.seed!),
      out: values.out!,
      format,
      templates: values.templates,
      labelTexts: values["label-texts"]
        ? values["label-texts"].split(",").map((s) => s.trim())
        : undefined,
      rankRenormalized: values["rank-renormalized"],
      detOut: values["det-out"],
    });
    console.log(
      `wrote ${result.written} samples x ${values.passes} passes to ${result.out}` +
        (result.skipped.length ? `; skipped ${result.skipped.length} rows` : ""),
    );
    for (const skip of result.skipped) {
      console.error(`  skipped row ${skip.sampleId}: ${skip.error}`);
    }
  } catch (err) {
    console.error(`export failed: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}

const argv = process.argv.slice(2);
if (argv[0] === "gen-checkpoint") {
  runGenCheckpoint(argv.slice(1));
} else {
  runExport(argv[0] === "export" ? argv.slice(1) : argv);
}
