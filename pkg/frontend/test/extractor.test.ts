import { describe, expect, it } from "vitest";

import { embedFrame, extract, meanFlow, solidColorFrame } from "../src/extractor";

function cosine(a: Float32Array, b: Float32Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i += 1) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / Math.sqrt(na * nb);
}

describe("embedFrame", () => {
  it("emits unit vectors", () => {
    const vec = embedFrame(solidColorFrame(10, 200, 30), 0);
    let norm = 0;
    for (const v of vec) norm += v * v;
    expect(Math.sqrt(norm)).toBeCloseTo(1, 6);
  });

  it("keeps same-scene frames nearly parallel", () => {
    const a = embedFrame(solidColorFrame(128, 0, 0), 0);
    const b = embedFrame(solidColorFrame(128, 0, 0), 1);
    expect(cosine(a, b)).toBeGreaterThan(0.999);
  });

  it("separates different scenes", () => {
    const a = embedFrame(solidColorFrame(255, 0, 0), 0);
    const b = embedFrame(solidColorFrame(0, 0, 255), 0);
    expect(Math.abs(cosine(a, b))).toBeLessThan(0.5);
  });

  it("is deterministic", () => {
    const a = embedFrame(solidColorFrame(1, 2, 3), 4);
    const b = embedFrame(solidColorFrame(1, 2, 3), 4);
    expect(Array.from(a)).toEqual(Array.from(b));
  });
});

describe("extract", () => {
  it("zeroes the flow of frame 0", () => {
    const frames = [solidColorFrame(0, 0, 0), solidColorFrame(255, 255, 255)];
    const stream = extract(frames, 30, 0n);
    expect(Array.from(stream.flow[0]).every((v) => v === 0)).toBe(true);
    expect(Array.from(stream.flow[1]).some((v) => v !== 0)).toBe(true);
  });

  it("produces one clip and flow row per frame", () => {
    const frames = [1, 2, 3].map((v) => solidColorFrame(v, v, v));
    const stream = extract(frames, 24, 0n);
    expect(stream.clip.length).toBe(3);
    expect(stream.flow.length).toBe(3);
    expect(stream.fps).toBe(24);
  });

  it("rejects empty input", () => {
    expect(() => extract([], 30, 0n)).toThrow(/at least one frame/);
  });
});

describe("meanFlow", () => {
  it("is zero for identical frames", () => {
    const frame = solidColorFrame(50, 60, 70);
    expect(meanFlow(frame, frame)).toEqual([0, 0]);
  });

  it("tracks brightness shift direction", () => {
    const [dx] = meanFlow(solidColorFrame(0, 0, 0), solidColorFrame(255, 0, 0));
    expect(dx).toBeCloseTo(1, 6);
  });
});
