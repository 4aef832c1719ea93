// Pinned 64-bit RNG shared with the Python scoring package. Both sides
// implement the same two public-domain primitives (FNV-1a and splitmix64),
// so a stream id plus a seed fully determines every draw in either runtime.

const MASK64 = 0xffffffffffffffffn;

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x00000100000001b3n;

const GOLDEN = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

export function fnv1a64(text: string): bigint {
  let h = FNV_OFFSET;
  for (const byte of Buffer.from(text, "utf8")) {
    h ^= BigInt(byte);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

export function splitmix64Mix(x: bigint): bigint {
  let z = (x + GOLDEN) & MASK64;
  z = ((z ^ (z >> 30n)) * MIX1) & MASK64;
  z = ((z ^ (z >> 27n)) * MIX2) & MASK64;
  return z ^ (z >> 31n);
}

export class SplitMix64 {
  private state: bigint;

  constructor(seed: bigint) {
    this.state = seed & MASK64;
  }

  nextU64(): bigint {
    this.state = (this.state + GOLDEN) & MASK64;
    let z = this.state;
    z = ((z ^ (z >> 30n)) * MIX1) & MASK64;
    z = ((z ^ (z >> 27n)) * MIX2) & MASK64;
    return z ^ (z >> 31n);
  }

  nextBelow(bound: number): number {
    if (bound <= 0) throw new RangeError("bound must be positive");
    return Number(this.nextU64() % BigInt(bound));
  }

  // 53-bit uniform in [0, 1), the usual double construction.
  nextUnit(): number {
    return Number(this.nextU64() >> 11n) * 2 ** -53;
  }
}

export function streamSeed(seed: bigint, streamId: string): bigint {
  return splitmix64Mix((seed & MASK64) ^ fnv1a64(streamId));
}

export function stream(seed: bigint, streamId: string): SplitMix64 {
  return new SplitMix64(streamSeed(seed, streamId));
}
