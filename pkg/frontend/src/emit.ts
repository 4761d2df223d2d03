/**
 * CLI: emit a `.evf` container (plus a provenance sidecar) for a synthetic
 * clip rendered by the stub extractor.
 *
 *   node dist/emit.js out.evf --frames 6 --solid-color 128,0,0 [--fps 30] [--seed 0]
 */

import * as fs from "fs";

import { writeFeatures } from "./evf";
import { Frame, MODEL_VERSION, extract, solidColorFrame } from "./extractor";

interface Options {
  out: string;
  frames: number;
  color: [number, number, number];
  fps: number;
  seed: bigint;
}

function parseArgs(argv: string[]): Options {
  const opts: Options = { out: "", frames: 6, color: [128, 128, 128], fps: 30, seed: 0n };
  const rest = [...argv];
  while (rest.length > 0) {
    const arg = rest.shift() as string;
    switch (arg) {
      case "--frames":
        opts.frames = Number(rest.shift());
        break;
      case "--solid-color": {
        const parts = (rest.shift() ?? "").split(",").map(Number);
        if (parts.length !== 3 || parts.some(Number.isNaN)) {
          throw new Error("--solid-color expects r,g,b");
        }
        opts.color = parts as [number, number, number];
        break;
      }
      case "--fps":
        opts.fps = Number(rest.shift());
        break;
      case "--seed":
        opts.seed = BigInt(rest.shift() ?? "0");
        break;
      default:
        if (arg.startsWith("--")) throw new Error(`unknown flag ${arg}`);
        opts.out = arg;
    }
  }
  if (!opts.out) throw new Error("usage: emit.js <out.evf> [--frames N] [--solid-color r,g,b]");
  if (!Number.isInteger(opts.frames) || opts.frames < 1) throw new Error("--frames must be >= 1");
  return opts;
}

function main(): void {
  const opts = parseArgs(process.argv.slice(2));
  const frames: Frame[] = [];
  for (let i = 0; i < opts.frames; i += 1) {
    frames.push(solidColorFrame(opts.color[0], opts.color[1], opts.color[2]));
  }
  const stream = extract(frames, opts.fps, opts.seed);
  writeFeatures(stream, opts.out);
  const sidecar = { seed: Number(opts.seed), model_versions: { embedder: MODEL_VERSION } };
  fs.writeFileSync(`${opts.out}.sidecar.json`, JSON.stringify(sidecar));
  console.log(`wrote ${opts.out} (${opts.frames} frames)`);
}

main();
