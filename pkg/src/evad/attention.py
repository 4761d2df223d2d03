"""Training-free attention propagation over the dynamic frame graph.

Fixed orthogonal projections (QR of seeded Gaussian matrices) define the
query/key/value maps; each node aggregates value-transformed neighbors with
softmax attention modulated by the time-decayed edge weights, adds the result
to its own feature, and the whole stream is mean-centered after every
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, NoNeighbors
from .features import FUSED_DIM, FusedFeatures
from .graph import DynamicGraph

_EPS = 1e-12


@dataclass(frozen=True)
class AttentionConfig:
    seed: int = 0
    k: int = 64
    d: int = FUSED_DIM
    iterations: int = 1
    d_a: int | None = None  # attention scale; defaults to k

    def __post_init__(self):
        if self.k > self.d:
            raise ValueError(f"k ({self.k}) must be <= d ({self.d})")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")

    @property
    def scale_dim(self) -> int:
        return self.k if self.d_a is None else self.d_a


@dataclass(frozen=True)
class PropagatedFeatures:
    vectors: np.ndarray
    iterations_applied: int
    seed: int

    @property
    def n_frames(self) -> int:
        return self.vectors.shape[0]


@lru_cache(maxsize=32)
def _projections(seed: int, d: int, k: int):
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((d, k)))
    kk, _ = np.linalg.qr(rng.standard_normal((d, k)))
    v, _ = np.linalg.qr(rng.standard_normal((d, d)))
    for m in (q, kk, v):
        m.setflags(write=False)
    return q, kk, v


def make_projections(cfg: AttentionConfig):
    """Q (d x k), K (d x k), V (d x d): Q-factors of seeded standard-normal draws.

    Deterministic in (seed, d, k), so repeated calls are served from a cache.
    """
    return _projections(cfg.seed, cfg.d, cfg.k)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def attention_weights(i: int, graph: DynamicGraph, features: np.ndarray,
                      q: np.ndarray, k: np.ndarray, cfg: AttentionConfig) -> dict[int, float]:
    """Softmax attention of node i over its temporal neighbors."""
    neigh = graph.neighbors(i)
    if not neigh:
        raise NoNeighbors(f"node {i} has no neighbors")
    fq = features[i] @ q
    fk = features[neigh] @ k
    logits = fk @ fq / np.sqrt(cfg.scale_dim)
    weights = _softmax(logits)
    return dict(zip(neigh, weights.tolist()))


def propagate(features, graph: DynamicGraph, cfg: AttentionConfig) -> PropagatedFeatures:
    """Run attention message passing with residual update and global centering.

    The per-neighbor combination weight is the softmax attention modulated by
    the signed edge weight and normalized by the total absolute modulated
    mass, so the weights carry unit absolute mass.  For a node whose edges all
    vanish the message term is skipped.
    """
    if isinstance(features, FusedFeatures):
        mat = features.vectors
    else:
        mat = np.asarray(features)
    f = np.array(mat, dtype=np.float64)
    if f.ndim != 2 or f.shape[1] != cfg.d:
        raise DimensionMismatch(f"features must be T x {cfg.d}, got {f.shape}")
    n = f.shape[0]
    if n != graph.n:
        raise DimensionMismatch(f"features have {n} frames but graph has {graph.n} nodes")

    q, k, v = make_projections(cfg)
    scale = np.sqrt(cfg.scale_dim)
    w = graph.window
    band = graph.band_matrix()  # (n, 2w + 1), column w + offset

    for _ in range(cfg.iterations):
        fq = f @ q
        fk = f @ k
        fv = f @ v
        updated = f.copy()
        for i in range(n):
            lo = max(0, i - w)
            hi = min(n - 1, i + w)
            neigh = np.r_[lo:i, i + 1 : hi + 1]
            if neigh.size == 0:
                continue
            logits = fk[neigh] @ fq[i] / scale
            atten = _softmax(logits)
            e_ij = band[i, neigh - i + w]
            mass = float(np.abs(atten * e_ij).sum())
            if mass <= _EPS:
                continue
            coef = atten * e_ij / mass
            updated[i] += coef @ fv[neigh]
        f = updated - updated.mean(axis=0)

    return PropagatedFeatures(vectors=f, iterations_applied=cfg.iterations, seed=cfg.seed)
