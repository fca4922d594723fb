import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { ExportJob, exportMcDropout } from "../src/export.js";
import { generateCheckpoint, writeCheckpoint } from "../src/model.js";
import { binaryLabel, rankMulticlass } from "../src/scores.js";

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), "export-"));
}

function writeSst2Rows(path: string, n: number): void {
  const lines = ["x"];
  const moods = [
    "a gorgeous and moving picture",
    "tedious from start to finish",
    "the cast carries a thin script",
    "never earns its runtime",
    "quietly devastating and sharp",
  ];
  for (let i = 0; i < n; i++) {
    lines.push(`${moods[i % moods.length]} take ${i}`);
  }
  writeFileSync(path, lines.join("\n") + "\n");
}

function baseJob(dir: string, overrides: Partial<ExportJob> = {}): ExportJob {
  return {
    model: "tiny-entail-v1",
    task: "sst2",
    input: join(dir, "rows.tsv"),
    nPasses: 7,
    dropoutRate: 0.1,
    layerFromTop: 4,
    pool: "mean",
    baseSeed: 3n,
    out: join(dir, "records.bin"),
    format: "binary",
    ...overrides,
  };
}

describe("score rules", () => {
  it("binary label follows the neutral-free True probability", () => {
    expect(binaryLabel([0.6, 0.3, 0.1])).toBe(1);
    expect(binaryLabel([0.1, 0.2, 0.7])).toBe(0);
    expect(() => binaryLabel([0, 1, 0])).toThrow(/both zero/);
  });

  it("multi-class ranking breaks ties toward the lowest class", () => {
    expect(rankMulticlass([[0.2, 0.4, 0.4], [0.7, 0.2, 0.1]])).toBe(1);
    expect(rankMulticlass([[0.4, 0.3, 0.3], [0.4, 0.2, 0.4]])).toBe(0);
  });
});

describe("exportMcDropout", () => {
  it("writes m x n records with the requested header", () => {
    const dir = tempDir();
    writeSst2Rows(join(dir, "rows.tsv"), 10);
    const result = exportMcDropout(baseJob(dir));
    expect(result.written).toBe(10);
    const buf = readFileSync(join(dir, "records.bin"));
    expect(buf.readBigUInt64LE(8)).toBe(10n); // m
    expect(buf.readUInt32LE(16)).toBe(7); // n
  });

  it("is byte-identical across reruns with fixed seeds", () => {
    const dir = tempDir();
    writeSst2Rows(join(dir, "rows.tsv"), 6);
    exportMcDropout(baseJob(dir, { out: join(dir, "a.bin") }));
    exportMcDropout(baseJob(dir, { out: join(dir, "b.bin") }));
    expect(readFileSync(join(dir, "a.bin")).equals(readFileSync(join(dir, "b.bin")))).toBe(true);
  });

  it("with dropout disabled every pass of a row is identical", () => {
    const dir = tempDir();
    writeSst2Rows(join(dir, "rows.tsv"), 5);
    exportMcDropout(baseJob(dir, { dropoutRate: 0, format: "jsonl", out: join(dir, "r.jsonl") }));
    const lines = readFileSync(join(dir, "r.jsonl"), "utf-8").trim().split("\n").slice(1);
    const rows = lines.map((l) => JSON.parse(l));
    for (let sid = 0; sid < 5; sid++) {
      const passes = rows.filter((r) => r.sample_id === sid);
      expect(passes).toHaveLength(7);
      for (const pass of passes.slice(1)) {
        expect(pass.label).toBe(passes[0].label);
        expect(pass.scores).toEqual(passes[0].scores);
        expect(pass.embedding).toEqual(passes[0].embedding);
      }
    }
  });

  it("dropout makes passes differ while staying per-seed deterministic", () => {
    const dir = tempDir();
    writeSst2Rows(join(dir, "rows.tsv"), 4);
    exportMcDropout(baseJob(dir, { format: "jsonl", out: join(dir, "r.jsonl") }));
    const rows = readFileSync(join(dir, "r.jsonl"), "utf-8")
      .trim()
      .split("\n")
      .slice(1)
      .map((l) => JSON.parse(l));
    const first = rows.filter((r) => r.sample_id === 0);
    const distinct = new Set(first.map((r) => JSON.stringify(r.embedding)));
    expect(distinct.size).toBeGreaterThan(1);
  });

  it("logs per-row errors and keeps going; fails only when all rows fail", () => {
    const dir = tempDir();
    const ckptPath = join(dir, "tiny.json");
    writeCheckpoint(generateCheckpoint(5n, 16, 5, 12), ckptPath); // maxTokens 12
    const long = Array.from({ length: 40 }, (_, i) => `word${i}`).join(" ");
    writeFileSync(join(dir, "rows.tsv"), `x\nshort and sweet\n${long}\n`);
    const result = exportMcDropout(baseJob(dir, { model: ckptPath }));
    expect(result.written).toBe(1);
    expect(result.skipped).toHaveLength(1);
    expect(result.skipped[0].error).toMatch(/sequence length/);

    writeFileSync(join(dir, "rows.tsv"), `x\n${long}\n${long} again\n`);
    expect(() => exportMcDropout(baseJob(dir, { model: ckptPath }))).toThrow(
      /every input row failed/,
    );
  });

  it("multi-class export stores the winner's embedding and ranked scores", () => {
    const dir = tempDir();
    writeFileSync(join(dir, "rows.tsv"), "x\nthe service was slow but kind\n");
    exportMcDropout(
      baseJob(dir, {
        task: "label-text",
        labelTexts: ["I am happy", "I am sad", "I am shocked"],
        format: "jsonl",
        out: join(dir, "r.jsonl"),
        nPasses: 2,
      }),
    );
    const rows = readFileSync(join(dir, "r.jsonl"), "utf-8")
      .trim()
      .split("\n")
      .slice(1)
      .map((l) => JSON.parse(l));
    for (const row of rows) {
      expect(row.scores).toHaveLength(3);
      const sum = row.scores.reduce((a: number, b: number) => a + b, 0);
      expect(sum).toBeCloseTo(1.0, 4);
      expect(row.label).toBeGreaterThanOrEqual(0);
      expect(row.label).toBeLessThan(3);
    }
  });
});

describe("round trip through the sple toolkit", () => {
  it(
    "exported files load, pass integrity checks, and survive the edit pipeline",
    { timeout: 120_000 },
    () => {
      const dir = tempDir();
      writeSst2Rows(join(dir, "rows.tsv"), 20);
      const records = join(dir, "records.bin");
      const det = join(dir, "det.bin");
      exportMcDropout(baseJob(dir, { out: records, detOut: det }));

      const probe = execFileSync(
        "python3",
        [
          "-c",
          [
            "import sys",
            "from sple.data import load_records",
            "rs = load_records(sys.argv[1])",
            "det = load_records(sys.argv[2])",
            "assert rs.m == 20 and rs.n_passes == 7 and rs.n_classes == 3",
            "assert det.m == 20 and det.n_passes == 1",
            "assert rs.e_dim == det.e_dim",
            "print('loaded', rs.m, rs.n_passes, rs.e_dim)",
          ].join("\n"),
          records,
          det,
        ],
        { encoding: "utf-8" },
      );
      expect(probe).toContain("loaded 20 7");

      const edited = join(dir, "edited.csv");
      execFileSync(
        "sple",
        [
          "edit",
          "--records", records,
          "--fallback-records", det,
          "--neighbors", "9",
          "--remove-frac", "0.2",
          "--out", edited,
        ],
        { encoding: "utf-8" },
      );
      const lines = readFileSync(edited, "utf-8").trim().split("\n");
      expect(lines[0]).toBe("sample_id,final_label,provenance,votes_kept");
      expect(lines).toHaveLength(21); // one final label per input row
      console.log(`[acceptance] PASS: exporter round trip, 20 rows -> edit produced 20 labels`);
    },
  );
});
