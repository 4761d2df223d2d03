/**
 * Writer and reader for the `.evf` feature container.
 *
 * Layout (all little-endian, no padding): 8-byte magic "EVADFEAT",
 * u32 version=1, u32 frame count, u32 clip dim (512), u32 flow dim (128),
 * f32 fps, then the clip payload and the flow payload as row-major f32.
 */

import * as fs from "fs";

export const EVF_MAGIC = "EVADFEAT";
export const EVF_VERSION = 1;
export const CLIP_DIM = 512;
export const FLOW_DIM = 128;

const HEADER_SIZE = 8 + 4 * 4 + 4;

export interface FeatureStream {
  fps: number;
  clip: Float32Array[]; // T rows of 512
  flow: Float32Array[]; // T rows of 128
}

export function encodeFeatures(stream: FeatureStream): Buffer {
  const t = stream.clip.length;
  if (stream.flow.length !== t || t < 1) {
    throw new Error(`clip/flow frame counts disagree or empty: ${t} vs ${stream.flow.length}`);
  }
  const buf = Buffer.alloc(HEADER_SIZE + 4 * t * (CLIP_DIM + FLOW_DIM));
  buf.write(EVF_MAGIC, 0, "ascii");
  buf.writeUInt32LE(EVF_VERSION, 8);
  buf.writeUInt32LE(t, 12);
  buf.writeUInt32LE(CLIP_DIM, 16);
  buf.writeUInt32LE(FLOW_DIM, 20);
  buf.writeFloatLE(stream.fps, 24);
  let off = HEADER_SIZE;
  for (const row of stream.clip) {
    if (row.length !== CLIP_DIM) throw new Error(`clip row has ${row.length} components`);
    for (const value of row) {
      buf.writeFloatLE(value, off);
      off += 4;
    }
  }
  for (const row of stream.flow) {
    if (row.length !== FLOW_DIM) throw new Error(`flow row has ${row.length} components`);
    for (const value of row) {
      buf.writeFloatLE(value, off);
      off += 4;
    }
  }
  return buf;
}

export function writeFeatures(stream: FeatureStream, path: string): void {
  fs.writeFileSync(path, encodeFeatures(stream));
}

export function readFeatures(path: string): FeatureStream {
  const buf = fs.readFileSync(path);
  if (buf.length < HEADER_SIZE) throw new Error(`${path}: shorter than the header`);
  if (buf.toString("ascii", 0, 8) !== EVF_MAGIC) throw new Error(`${path}: bad magic`);
  if (buf.readUInt32LE(8) !== EVF_VERSION) throw new Error(`${path}: unsupported version`);
  const t = buf.readUInt32LE(12);
  const clipDim = buf.readUInt32LE(16);
  const flowDim = buf.readUInt32LE(20);
  if (clipDim !== CLIP_DIM || flowDim !== FLOW_DIM) {
    throw new Error(`${path}: unexpected dims ${clipDim}x${flowDim}`);
  }
  const fps = buf.readFloatLE(24);
  const expected = HEADER_SIZE + 4 * t * (clipDim + flowDim);
  if (buf.length < expected) throw new Error(`${path}: truncated payload`);
  let off = HEADER_SIZE;
  const clip: Float32Array[] = [];
  for (let i = 0; i < t; i += 1) {
    const row = new Float32Array(clipDim);
    for (let c = 0; c < clipDim; c += 1) {
      row[c] = buf.readFloatLE(off);
      off += 4;
    }
    clip.push(row);
  }
  const flow: Float32Array[] = [];
  for (let i = 0; i < t; i += 1) {
    const row = new Float32Array(flowDim);
    for (let c = 0; c < flowDim; c += 1) {
      row[c] = buf.readFloatLE(off);
      off += 4;
    }
    flow.push(row);
  }
  return { fps, clip, flow };
}
