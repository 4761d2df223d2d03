"""End-to-end composition: features -> graph -> attention -> boundaries -> scores."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from .attention import AttentionConfig, propagate
from .boundary import BoundaryConfig, BoundarySignal, detect_boundaries
from .features import FrameFeatures, fuse
from .graph import GraphConfig, build_graph
from .scoring import (
    DetectionResult,
    Scorer,
    assemble_frame_scores,
    events_from_boundaries,
    score_events,
)


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.75
    gamma: float = 0.6
    window: int = 60
    seed: int = 0
    k: int = 64
    iterations: int = 1
    w: int = 60
    mad_k: float = 3.0
    min_gap: int = 30
    min_event_len: int = 16
    scorer_url: str = "mock"
    fixed_threshold: float | None = None
    jobs: int = 4

    def graph_config(self) -> GraphConfig:
        return GraphConfig(alpha=self.alpha, gamma=self.gamma, window=self.window)

    def attention_config(self) -> AttentionConfig:
        return AttentionConfig(seed=self.seed, k=self.k, iterations=self.iterations)

    def boundary_config(self) -> BoundaryConfig:
        return BoundaryConfig(w=self.w, mad_k=self.mad_k, min_gap=self.min_gap,
                              min_event_len=self.min_event_len,
                              fixed_threshold=self.fixed_threshold)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        known = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, value in values.items():
            if key not in known:
                raise ValueError(f"unknown config key: {key}")
            kwargs[key] = value
        return cls(**kwargs)


def segment_stream(frames: FrameFeatures, cfg: RunConfig) -> BoundarySignal:
    """Boundary detection for one feature stream under a run configuration."""
    if frames.n_frames == 1:
        import numpy as np

        empty = np.empty(0)
        return BoundarySignal(raw=empty, smoothed=empty.copy(), ratio=empty.copy(),
                              threshold=0.0, boundaries=[])
    fused = fuse(frames, cfg.alpha)
    graph = build_graph(frames, cfg.graph_config())
    propagated = propagate(fused, graph, cfg.attention_config())
    return detect_boundaries(propagated, cfg.boundary_config())


def score_stream(frames: FrameFeatures, cfg: RunConfig, scorer: Scorer,
                 frames_for=None) -> DetectionResult:
    """Segment, score each event, and assemble the frame-level result."""
    signal = segment_stream(frames, cfg)
    events = events_from_boundaries(frames.n_frames, signal.boundaries)
    scored, unparseable = score_events(events, frames.video_id, scorer,
                                       max_in_flight=cfg.jobs, frames_for=frames_for)
    frame_scores = assemble_frame_scores(scored, frames.n_frames)
    provenance = {
        "config": cfg.to_dict(),
        "seeds": {"attention": cfg.seed},
        "flags": [f"UNPARSEABLE:{i}" for i in unparseable],
    }
    return DetectionResult(video_id=frames.video_id, fps=frames.fps,
                           events=tuple(scored), frame_scores=frame_scores,
                           provenance=provenance)
