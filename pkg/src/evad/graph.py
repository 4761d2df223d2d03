"""Time-decayed frame adjacency and the temporal neighbor structure.

Edge weight between frames i and j combines clip cosine similarity and a
flow-distance kernel, divided by (1 + gamma * |i - j|).  Only pairs within a
temporal window are connected; weights are stored once per lag band.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .features import FrameFeatures


@dataclass(frozen=True)
class GraphConfig:
    alpha: float = 0.75
    gamma: float = 0.6
    window: int = 60

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")


def edge_weight(clip_i, clip_j, flow_i, flow_j, lag: int, cfg: GraphConfig) -> float:
    """Decayed cross-modal affinity between two frames at temporal distance `lag`."""
    cos = float(np.dot(clip_i, clip_j))
    flow_term = float(np.exp(-np.linalg.norm(np.asarray(flow_i, dtype=np.float64) - flow_j)))
    return (cfg.alpha * cos + (1.0 - cfg.alpha) * flow_term) / (1.0 + cfg.gamma * lag)


@dataclass(frozen=True)
class DynamicGraph:
    """Windowed temporal graph; `by_lag[l - 1][i]` is the weight of edge (i, i + l)."""

    n: int
    window: int
    cfg: GraphConfig
    by_lag: tuple

    def neighbors(self, i: int) -> list[int]:
        if not 0 <= i < self.n:
            raise IndexError(i)
        lo = max(0, i - self.window)
        hi = min(self.n - 1, i + self.window)
        return [j for j in range(lo, hi + 1) if j != i]

    def weight(self, i: int, j: int) -> float:
        lag = abs(i - j)
        if lag == 0 or lag > self.window:
            raise KeyError(f"({i}, {j}) is not a stored edge")
        return float(self.by_lag[lag - 1][min(i, j)])

    def edges(self):
        """Yield (i, j, weight) with i < j, in lag-major order."""
        for lag in range(1, min(self.window, self.n - 1) + 1):
            band = self.by_lag[lag - 1]
            for i in range(band.shape[0]):
                yield i, i + lag, float(band[i])

    def band_matrix(self) -> np.ndarray:
        """Dense (n, 2*window + 1) band; column w + offset holds weight at that offset."""
        w = self.window
        band = np.zeros((self.n, 2 * w + 1))
        for lag in range(1, min(w, self.n - 1) + 1):
            vals = self.by_lag[lag - 1]
            band[: self.n - lag, w + lag] = vals
            band[lag:, w - lag] = vals
        return band

    def dump_json(self) -> str:
        payload = {
            "n": self.n,
            "window": self.window,
            "gamma": self.cfg.gamma,
            "alpha": self.cfg.alpha,
            "edges": [[i, j, w] for i, j, w in self.edges()],
        }
        return json.dumps(payload)


def build_graph(frames: FrameFeatures, cfg: GraphConfig) -> DynamicGraph:
    """Compute all windowed edge weights for a feature stream (vectorized per lag)."""
    clip = frames.clip.astype(np.float64)
    flow = frames.flow.astype(np.float64)
    n = frames.n_frames
    bands = []
    for lag in range(1, min(cfg.window, n - 1) + 1):
        cos = np.einsum("ij,ij->i", clip[:-lag], clip[lag:])
        dist = np.linalg.norm(flow[:-lag] - flow[lag:], axis=1)
        num = cfg.alpha * cos + (1.0 - cfg.alpha) * np.exp(-dist)
        bands.append(num / (1.0 + cfg.gamma * lag))
    return DynamicGraph(n=n, window=cfg.window, cfg=cfg, by_lag=tuple(bands))
