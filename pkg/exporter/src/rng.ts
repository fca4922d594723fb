/**
 * Deterministic seeding and uniform draws.
 *
 * Pass seeds use the same SplitMix64-style avalanche as the sple toolkit:
 *   mix(x)  = splitmix64 finalizer of x
 *   seed    = mix(mix(mix(base) ^ sampleId) ^ passIndex)
 * Test vectors: mixPassSeed(0n,0n,0n) === 0x238275BC38FCBE91n,
 * mixPassSeed(42n,7n,3n) === 0xF55E4254D4655539n.
 */

const MASK64 = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;

export function splitmix64(x: bigint): bigint {
  x = (x + GOLDEN) & MASK64;
  x = ((x ^ (x >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
  x = ((x ^ (x >> 27n)) * 0x94d049bb133111ebn) & MASK64;
  return x ^ (x >> 31n);
}

export function mixPassSeed(base: bigint, sampleId: bigint, passIndex: bigint): bigint {
  let h = splitmix64(base & MASK64);
  h = splitmix64(h ^ (sampleId & MASK64));
  h = splitmix64(h ^ (passIndex & MASK64));
  return h;
}

/** Uniform [0,1) stream driven by repeated splitmix64 steps. */
export class Rng {
  #state: bigint;

  constructor(seed: bigint) {
    this.#state = seed & MASK64;
  }

  nextUint64(): bigint {
    this.#state = (this.#state + GOLDEN) & MASK64;
    let z = this.#state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    return z ^ (z >> 31n);
  }

  /** Uniform double in [0, 1) from the top 53 bits. */
  next(): number {
    return Number(this.nextUint64() >> 11n) / 2 ** 53;
  }

  /** Standard normal via Box-Muller (two uniforms per pair). */
  nextGaussian(): number {
    let u = this.next();
    while (u === 0) u = this.next();
    const v = this.next();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }
}

/** FNV-1a 64-bit hash for token-to-seed mapping. */
export function fnv1a64(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  for (let i = 0; i < text.length; i++) {
    h ^= BigInt(text.charCodeAt(i));
    h = (h * 0x100000001b3n) & MASK64;
  }
  return h;
}
