/**
 * Stub feature extractor.
 *
 * Stands in for the real embedding and optical-flow backbones: frames map to
 * deterministic pseudo-embeddings driven by their pixel statistics, so
 * near-identical frames produce near-identical unit vectors and the emitted
 * container exercises the full engine contract without any model weights.
 */

import { CLIP_DIM, FLOW_DIM, FeatureStream } from "./evf";
import { projectFlow, flowProjector, seededNormals } from "./rng";

export const MODEL_VERSION = "stub-embedder/1";

export interface Frame {
  pixels: Uint8Array; // flat RGB triplets
  width: number;
  height: number;
}

export function solidColorFrame(r: number, g: number, b: number, width = 8, height = 8): Frame {
  const pixels = new Uint8Array(width * height * 3);
  for (let i = 0; i < pixels.length; i += 3) {
    pixels[i] = r;
    pixels[i + 1] = g;
    pixels[i + 2] = b;
  }
  return { pixels, width, height };
}

function fnv1a64(bytes: Uint8Array, tag: bigint): bigint {
  let hash = 0xcbf29ce484222325n ^ tag;
  for (const byte of bytes) {
    hash ^= BigInt(byte);
    hash = (hash * 0x100000001b3n) & ((1n << 64n) - 1n);
  }
  return hash;
}

function meanColor(frame: Frame): [number, number, number] {
  let r = 0;
  let g = 0;
  let b = 0;
  const n = frame.pixels.length / 3;
  for (let i = 0; i < frame.pixels.length; i += 3) {
    r += frame.pixels[i];
    g += frame.pixels[i + 1];
    b += frame.pixels[i + 2];
  }
  return [r / n, g / n, b / n];
}

function normalize(values: Float64Array): Float32Array {
  let norm = 0;
  for (const v of values) norm += v * v;
  norm = Math.sqrt(norm);
  const out = new Float32Array(values.length);
  for (let i = 0; i < values.length; i += 1) out[i] = values[i] / norm;
  return out;
}

/**
 * Deterministic 512-d unit embedding: a base vector keyed by the quantized
 * mean color plus a small perturbation keyed by the exact pixel content, so
 * frames of the same scene stay within a fraction of a degree of each other.
 */
export function embedFrame(frame: Frame, frameIndex: number): Float32Array {
  const [r, g, b] = meanColor(frame);
  const bucket = new Uint8Array([Math.round(r / 8), Math.round(g / 8), Math.round(b / 8)]);
  const base = seededNormals(fnv1a64(bucket, 0x5ba5en), CLIP_DIM);
  const detail = seededNormals(fnv1a64(frame.pixels, BigInt(frameIndex) + 1n), CLIP_DIM);
  const mixed = new Float64Array(CLIP_DIM);
  for (let i = 0; i < CLIP_DIM; i += 1) mixed[i] = base[i] + 0.01 * detail[i];
  return normalize(mixed);
}

/** Mean backward flow between consecutive frames, reduced to (dx, dy). */
export function meanFlow(prev: Frame, current: Frame): [number, number] {
  const [pr, pg] = meanColor(prev);
  const [cr, cg] = meanColor(current);
  // brightness-shift proxy for motion; the real extractor runs a flow model
  return [(cr - pr) / 255, (cg - pg) / 255];
}

export function extract(frames: Frame[], fps: number, flowSeed: bigint): FeatureStream {
  if (frames.length < 1) throw new Error("need at least one frame");
  const projector = flowProjector(flowSeed);
  const clip: Float32Array[] = [];
  const flow: Float32Array[] = [];
  frames.forEach((frame, index) => {
    clip.push(embedFrame(frame, index));
    if (index === 0) {
      flow.push(new Float32Array(FLOW_DIM)); // frame 0 has no predecessor
    } else {
      flow.push(Float32Array.from(projectFlow(meanFlow(frames[index - 1], frame), projector)));
    }
  });
  return { fps, clip, flow };
}
