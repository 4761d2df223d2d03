/**
 * Portable seeded random normals: splitmix64 for the integer stream and
 * Box-Muller for the Gaussian transform.  The engine regenerates the flow
 * projection matrix from the same seed, so the stream layout here must stay
 * in lockstep with the engine's generator.
 */

const MASK64 = (1n << 64n) - 1n;

export function* splitmix64(seed: bigint): Generator<bigint> {
  let state = seed & MASK64;
  for (;;) {
    state = (state + 0x9e3779b97f4a7c15n) & MASK64;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK64;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK64;
    yield z ^ (z >> 31n);
  }
}

/** Deterministic standard normals; pairs share one Box-Muller radius. */
export function seededNormals(seed: bigint, count: number): Float64Array {
  const gen = splitmix64(seed);
  const out = new Float64Array(count);
  let i = 0;
  while (i < count) {
    // uniforms in (0, 1]; u1 must stay positive for the log
    const u1 = (Number(gen.next().value >> 11n) + 1) * 2 ** -53;
    const u2 = Number(gen.next().value >> 11n) * 2 ** -53;
    const r = Math.sqrt(-2 * Math.log(u1));
    out[i] = r * Math.cos(2 * Math.PI * u2);
    i += 1;
    if (i < count) {
      out[i] = r * Math.sin(2 * Math.PI * u2);
      i += 1;
    }
  }
  return out;
}

export const FLOW_DIM = 128;

/** 2 x FLOW_DIM projection with unit-norm columns, regenerable from the seed. */
export function flowProjector(seed: bigint): Float64Array[] {
  const raw = seededNormals(seed, 2 * FLOW_DIM);
  const rows = [raw.slice(0, FLOW_DIM), raw.slice(FLOW_DIM)];
  for (let c = 0; c < FLOW_DIM; c += 1) {
    const norm = Math.hypot(rows[0][c], rows[1][c]);
    if (norm > 1e-12) {
      rows[0][c] /= norm;
      rows[1][c] /= norm;
    }
  }
  return rows;
}

/** Project a 2-d mean flow vector through the seeded matrix. */
export function projectFlow(meanFlow: [number, number], rows: Float64Array[]): Float64Array {
  const out = new Float64Array(FLOW_DIM);
  for (let c = 0; c < FLOW_DIM; c += 1) {
    out[c] = rows[0][c] * meanFlow[0] + rows[1][c] * meanFlow[1];
  }
  return out;
}
