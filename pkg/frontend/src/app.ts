/**
 * Scorer microservice: the /v1/describe and /v1/score wire protocol backed by
 * a deterministic stub model.  Malformed bodies get 400; model failures 503.
 */

import express, { Express, NextFunction, Request, Response } from "express";
import { z } from "zod";

const describeSchema = z.object({
  video_id: z.string(),
  event_index: z.number().int().nonnegative(),
  start_frame: z.number().int().nonnegative(),
  end_frame: z.number().int().positive(),
  frames: z.array(z.string().base64()),
});

const scoreSchema = z.object({
  video_id: z.string(),
  event_index: z.number().int().nonnegative(),
  description: z.string(),
});

/** Stable 32-bit content hash; stands in for model inference. */
function fnv1a32(text: string): number {
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i += 1) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash >>> 0;
}

export function stubDescribe(videoId: string, start: number, end: number, frameCount: number): string {
  return `Stub description of ${videoId} frames [${start}, ${end}): ${frameCount} sampled frames.`;
}

export function stubScore(description: string): number {
  return (fnv1a32(description) % 10000) / 10000;
}

export function createApp(): Express {
  const app = express();
  app.use(express.json({ limit: "64mb" }));

  app.get("/healthz", (_req, res) => {
    res.json({ status: "ok" });
  });

  app.post("/v1/describe", (req, res) => {
    const parsed = describeSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.message });
      return;
    }
    const { video_id, start_frame, end_frame, frames } = parsed.data;
    if (end_frame <= start_frame) {
      res.status(400).json({ error: "end_frame must exceed start_frame" });
      return;
    }
    res.json({ description: stubDescribe(video_id, start_frame, end_frame, frames.length) });
  });

  app.post("/v1/score", (req, res) => {
    const parsed = scoreSchema.safeParse(req.body);
    if (!parsed.success) {
      res.status(400).json({ error: parsed.error.message });
      return;
    }
    res.json({ score: stubScore(parsed.data.description) });
  });

  // body-parser syntax errors become 400, everything else 503 (model failure)
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (res.headersSent) {
      next(err);
      return;
    }
    const status = err instanceof SyntaxError ? 400 : 503;
    res.status(status).json({ error: err.message });
  });

  return app;
}
