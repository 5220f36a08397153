// SplitMix64-based deterministic PRNG. The stub models need weights that
// are identical across runs and platforms, which rules out Math.random.

const MASK = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;

export class Prng {
  private state: bigint;

  constructor(seed: bigint | number) {
    this.state = BigInt(seed) & MASK;
  }

  nextU64(): bigint {
    this.state = (this.state + GAMMA) & MASK;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
    return (z ^ (z >> 31n)) & MASK;
  }

  /** Uniform in [0, 1) with 53 bits of precision. */
  nextUniform(): number {
    return Number(this.nextU64() >> 11n) / 9007199254740992;
  }

  /** Standard normal via Box-Muller. */
  nextNormal(): number {
    let u = this.nextUniform();
    while (u === 0) u = this.nextUniform();
    const v = this.nextUniform();
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * v);
  }

  fillNormal(out: Float64Array): Float64Array {
    for (let i = 0; i < out.length; i++) out[i] = this.nextNormal();
    return out;
  }
}

/** Derive a stream seed from a master seed and a label, for independent weights. */
export function deriveSeed(master: bigint | number, label: string): bigint {
  let h = BigInt(master) & MASK;
  for (let i = 0; i < label.length; i++) {
    h = ((h ^ BigInt(label.charCodeAt(i))) * 0x100000001b3n) & MASK;
  }
  return h;
}
