/**
 * A small deterministic entailment encoder with forced inference-time
 * dropout.
 *
 * Architecture: hashed token embeddings -> L per-token feed-forward blocks
 * (linear, tanh, dropout) -> pooled hidden state -> 3-way softmax head
 * (entail / neutral / contradict). Hidden states are kept for every block,
 * so any "layer from the top" can be extracted; the final block counts as
 * layer 1 from the top.
 *
 * Every stochastic pass is keyed by a seed: dropout masks are drawn from
 * one generator per pass, block by block, token by token, in a fixed order.
 * With dropout disabled (or rate 0) a pass is exactly the deterministic
 * forward.
 */

import { readFileSync, writeFileSync } from "node:fs";

import { Rng, fnv1a64, splitmix64 } from "./rng.js";

export interface Checkpoint {
  magic: "SPLE-TS-ENC";
  version: 1;
  dim: number;
  nLayers: number;
  maxTokens: number;
  vocabSeed: string; // bigint as decimal string
  layers: { w: number[][]; b: number[] }[]; // dim x dim, dim
  head: { w: number[][]; b: number[] }; // dim x 3, 3
}

export interface ForwardResult {
  /** softmax (entail, neutral, contradict) */
  scores: [number, number, number];
  /** hidden states per block, each tokens x dim */
  layerStates: number[][][];
  tokens: string[];
}

export function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/[^a-z0-9']+/)
    .filter((t) => t.length > 0);
}

function softmax3(logits: number[]): [number, number, number] {
  const m = Math.max(...logits);
  const e = logits.map((v) => Math.exp(v - m));
  const s = e[0] + e[1] + e[2];
  return [e[0] / s, e[1] / s, e[2] / s];
}

export class EntailmentEncoder {
  readonly dim: number;
  readonly nLayers: number;
  readonly maxTokens: number;
  readonly #vocabSeed: bigint;
  readonly #layers: { w: number[][]; b: number[] }[];
  readonly #head: { w: number[][]; b: number[] };
  readonly #embedCache = new Map<string, number[]>();

  constructor(ckpt: Checkpoint) {
    if (ckpt.magic !== "SPLE-TS-ENC" || ckpt.version !== 1) {
      throw new Error("not a recognizable encoder checkpoint");
    }
    this.dim = ckpt.dim;
    this.nLayers = ckpt.nLayers;
    this.maxTokens = ckpt.maxTokens;
    this.#vocabSeed = BigInt(ckpt.vocabSeed);
    this.#layers = ckpt.layers;
    this.#head = ckpt.head;
  }

  static load(path: string): EntailmentEncoder {
    let ckpt: Checkpoint;
    try {
      ckpt = JSON.parse(readFileSync(path, "utf-8"));
    } catch (err) {
      throw new Error(`cannot load encoder checkpoint ${path}: ${err}`);
    }
    return new EntailmentEncoder(ckpt);
  }

  #embedToken(token: string): number[] {
    let vec = this.#embedCache.get(token);
    if (!vec) {
      const rng = new Rng(splitmix64(this.#vocabSeed ^ fnv1a64(token)));
      vec = Array.from({ length: this.dim }, () => rng.nextGaussian() / Math.sqrt(this.dim));
      this.#embedCache.set(token, vec);
    }
    return vec;
  }

  /**
   * One forward pass. With stochastic=true, inverted dropout (keep
   * probability 1-rate, survivors scaled by 1/(1-rate)) is applied to every
   * block output, drawn deterministically from passSeed.
   */
  forward(
    text: string,
    opts: { stochastic: boolean; passSeed: bigint; dropoutRate: number },
  ): ForwardResult {
    const tokens = tokenize(text);
    if (tokens.length === 0) {
      throw new Error("supposition tokenized to nothing");
    }
    if (tokens.length > this.maxTokens) {
      throw new Error(`sequence length ${tokens.length} exceeds limit ${this.maxTokens}`);
    }
    const { stochastic, passSeed, dropoutRate } = opts;
    const rng = new Rng(passSeed);
    const keep = 1 - dropoutRate;

    let states = tokens.map((t, i) =>
      // light positional flavor so token order matters
      this.#embedToken(t).map((v, d) => v * (1 + 0.05 * Math.sin((i + 1) * (d + 1)))),
    );
    const layerStates: number[][][] = [];
    for (const layer of this.#layers) {
      const next: number[][] = [];
      for (const vec of states) {
        const out = new Array<number>(this.dim);
        for (let j = 0; j < this.dim; j++) {
          let acc = layer.b[j];
          for (let i = 0; i < this.dim; i++) acc += vec[i] * layer.w[i][j];
          out[j] = Math.tanh(acc);
        }
        if (stochastic && dropoutRate > 0) {
          for (let j = 0; j < this.dim; j++) {
            out[j] = rng.next() >= dropoutRate ? out[j] / keep : 0;
          }
        } else if (stochastic) {
          // consume the stream identically so rate 0 stays comparable
          for (let j = 0; j < this.dim; j++) rng.next();
        }
        next.push(out);
      }
      states = next;
      layerStates.push(states.map((v) => [...v]));
    }

    const pooled = meanPool(states);
    const logits = [0, 1, 2].map((c) => {
      let acc = this.#head.b[c];
      for (let i = 0; i < this.dim; i++) acc += pooled[i] * this.#head.w[i][c];
      return acc;
    });
    return { scores: softmax3(logits), layerStates, tokens };
  }

  /** Hidden state of the n-th layer from the top (final block = 1). */
  extract(result: ForwardResult, layerFromTop: number, pool: "mean" | "cls"): number[] {
    if (layerFromTop < 1 || layerFromTop > this.nLayers) {
      throw new Error(`layer_from_top ${layerFromTop} outside [1, ${this.nLayers}]`);
    }
    const states = result.layerStates[this.nLayers - layerFromTop];
    return pool === "cls" ? [...states[0]] : meanPool(states);
  }
}

export function meanPool(states: number[][]): number[] {
  const dim = states[0].length;
  const out = new Array<number>(dim).fill(0);
  for (const vec of states) for (let d = 0; d < dim; d++) out[d] += vec[d];
  return out.map((v) => v / states.length);
}

/** Deterministically generate a small random-weight checkpoint. */
export function generateCheckpoint(
  seed: bigint,
  dim = 24,
  nLayers = 5,
  maxTokens = 128,
): Checkpoint {
  const rng = new Rng(splitmix64(seed));
  const matrix = (rows: number, cols: number, scale: number): number[][] =>
    Array.from({ length: rows }, () =>
      Array.from({ length: cols }, () => rng.nextGaussian() * scale),
    );
  const layers = Array.from({ length: nLayers }, () => ({
    w: matrix(dim, dim, 1.2 / Math.sqrt(dim)),
    b: Array.from({ length: dim }, () => rng.nextGaussian() * 0.05),
  }));
  const head = {
    w: matrix(dim, 3, 1 / Math.sqrt(dim)),
    b: [0, 0, 0],
  };
  return {
    magic: "SPLE-TS-ENC",
    version: 1,
    dim,
    nLayers,
    maxTokens,
    vocabSeed: String(splitmix64(seed ^ 0xabcdefn)),
    layers,
    head,
  };
}

export function writeCheckpoint(ckpt: Checkpoint, path: string): void {
  writeFileSync(path, JSON.stringify(ckpt));
}

/**
 * Resolve a model identifier: a path to a checkpoint JSON, or the builtin
 * "tiny-entail-v1" generated deterministically in memory.
 */
export function resolveModel(id: string): EntailmentEncoder {
  if (id === "tiny-entail-v1") {
    return new EntailmentEncoder(generateCheckpoint(42n));
  }
  return EntailmentEncoder.load(id);
}
