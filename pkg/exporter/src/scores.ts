/**
 * Score-to-label rules, mirroring the sple toolkit exactly.
 *
 * Binary tasks keep the raw (entail, neutral, contradict) triple as the
 * stored score vector and label 1 (True) when the neutral-free True
 * probability exceeds 0.5. Multi-class tasks rank per-class entail
 * probabilities, store them normalized to sum 1, and keep the winner
 * supposition's embedding.
 */

export type Triple = [number, number, number];

export function binaryTruthProb(triple: Triple): [number, number] {
  const denom = triple[0] + triple[2];
  if (denom <= 0) {
    throw new Error("entail and contradict scores are both zero; True/False odds undefined");
  }
  const pTrue = triple[0] / denom;
  return [pTrue, 1 - pTrue];
}

export function binaryLabel(triple: Triple): number {
  const [pTrue] = binaryTruthProb(triple);
  return pTrue > 0.5 ? 1 : 0;
}

export function rankMulticlass(triples: Triple[], renormalize = false): number {
  if (triples.length === 0) {
    throw new Error("rankMulticlass needs at least one supposition score");
  }
  const values = triples.map((t) => (renormalize ? binaryTruthProb(t)[0] : t[0]));
  let winner = 0;
  for (let i = 1; i < values.length; i++) {
    if (values[i] > values[winner]) winner = i; // ties keep the lowest index
  }
  return winner;
}

export function normalizedEntailVector(triples: Triple[]): number[] {
  const entail = triples.map((t) => t[0]);
  const total = entail.reduce((a, b) => a + b, 0);
  if (total <= 0) {
    throw new Error("all suppositions have zero entail mass");
  }
  return entail.map((v) => v / total);
}
