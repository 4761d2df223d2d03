"""Statistical event-boundary detection on propagated feature streams.

Pipeline: composite divergence between consecutive frames, quadratic
Savitzky-Golay smoothing, ratio against a windowed moving average, a
median + k * MAD adaptive threshold, and merging of adjacent candidates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, TooShort

_EPS = 1e-12
_REL_FLOOR = 1e-6


@dataclass(frozen=True)
class BoundaryConfig:
    w: int = 60                    # smoothing window; filters use w + 1 taps
    poly_order: int = 2
    mad_k: float = 3.0
    min_gap: int = 30
    min_event_len: int = 16
    fixed_threshold: float | None = None  # overrides the MAD rule when set

    def __post_init__(self):
        if self.w < 4 or self.w % 2 != 0:
            raise ValueError(f"w must be an even integer >= 4, got {self.w}")
        if self.poly_order >= self.w + 1:
            raise ValueError(f"poly_order {self.poly_order} must be < {self.w + 1} taps")
        if self.mad_k <= 0:
            raise ValueError(f"mad_k must be > 0, got {self.mad_k}")
        if self.min_gap < 1 or self.min_event_len < 1:
            raise ValueError("min_gap and min_event_len must be >= 1")


@dataclass(frozen=True)
class BoundarySignal:
    raw: np.ndarray
    smoothed: np.ndarray
    ratio: np.ndarray
    threshold: float
    boundaries: list[int] = field(default_factory=list)

    def export_csv(self) -> str:
        lines = ["index,raw,smoothed,ratio"]
        for i in range(len(self.raw)):
            lines.append(
                f"{i},{float(self.raw[i])!r},{float(self.smoothed[i])!r},{float(self.ratio[i])!r}"
            )
        return "\n".join(lines) + "\n"

    def export_json(self) -> str:
        return json.dumps({"threshold": self.threshold, "boundaries": list(self.boundaries)})


def divergence(f_i: np.ndarray, f_next: np.ndarray) -> float:
    """Squared L2 jump plus cosine dissimilarity between two feature vectors."""
    f_i = np.asarray(f_i, dtype=np.float64)
    f_next = np.asarray(f_next, dtype=np.float64)
    if f_i.shape != f_next.shape:
        raise DimensionMismatch(f"{f_i.shape} vs {f_next.shape}")
    diff = f_next - f_i
    cos = float(f_i @ f_next) / (max(np.linalg.norm(f_i), _EPS) * max(np.linalg.norm(f_next), _EPS))
    return float(diff @ diff) + (1.0 - cos)


def _savgol_kernel(taps: int, order: int) -> np.ndarray:
    half = (taps - 1) // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    design = np.vander(offsets, order + 1, increasing=True)
    # center-value evaluation row of the least-squares fit
    pinv = np.linalg.solve(design.T @ design, design.T)
    return pinv[0]


def _mirror_pad(x: np.ndarray, pad: int) -> np.ndarray:
    if len(x) == 1:
        return np.full(1 + 2 * pad, x[0])
    return np.pad(x, pad, mode="reflect")


def savgol_smooth(raw, cfg: BoundaryConfig) -> np.ndarray:
    """Quadratic Savitzky-Golay smoothing over w + 1 taps with mirror padding."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size == 0:
        return raw.copy()
    half = cfg.w // 2
    kernel = _savgol_kernel(cfg.w + 1, cfg.poly_order)
    padded = _mirror_pad(raw, half)
    return np.convolve(padded, kernel[::-1], mode="valid")


def moving_average(x, cfg: BoundaryConfig) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return x.copy()
    half = cfg.w // 2
    padded = _mirror_pad(x, half)
    kernel = np.full(cfg.w + 1, 1.0 / (cfg.w + 1))
    return np.convolve(padded, kernel, mode="valid")


def signal_ratio(smoothed, cfg: BoundaryConfig) -> np.ndarray:
    """Smoothed signal divided by its equal-weight moving average (guarded)."""
    smoothed = np.asarray(smoothed, dtype=np.float64)
    mu = moving_average(smoothed, cfg)
    return smoothed / np.maximum(mu, _EPS)


def adaptive_threshold(ratio, cfg: BoundaryConfig) -> float:
    ratio = np.asarray(ratio, dtype=np.float64)
    med = float(np.median(ratio))
    mad = float(np.median(np.abs(ratio - med)))
    return med + cfg.mad_k * mad


def _collapse_runs(candidates: np.ndarray, ratio: np.ndarray, min_gap: int) -> list[int]:
    """Collapse candidate signal indices within min_gap to the argmax-ratio index."""
    runs: list[int] = []
    start = 0
    for idx in range(1, len(candidates) + 1):
        if idx == len(candidates) or candidates[idx] - candidates[idx - 1] > min_gap:
            run = candidates[start:idx]
            runs.append(int(run[np.argmax(ratio[run])]))
            start = idx
    return runs


def _merge_short_events(bounds: list[int], features: np.ndarray, cfg: BoundaryConfig) -> list[int]:
    """Fold events shorter than min_event_len into the more similar neighbor.

    The final residual event is allowed to stay short.  Similarity across a
    boundary b is the cosine between features b - 1 and b; the boundary with
    the higher similarity is dropped.
    """
    n = features.shape[0]

    def boundary_sim(b: int) -> float:
        a, c = features[b - 1], features[b]
        return float(a @ c) / (max(np.linalg.norm(a), _EPS) * max(np.linalg.norm(c), _EPS))

    bounds = list(bounds)
    changed = True
    while changed and bounds:
        changed = False
        segs = [0] + bounds + [n]
        for e in range(len(segs) - 2):  # every event except the final residual
            start, end = segs[e], segs[e + 1]
            if end - start >= cfg.min_event_len:
                continue
            if e == 0:
                remove = end
            else:
                remove = start if boundary_sim(start) >= boundary_sim(end) else end
            bounds.remove(remove)
            changed = True
            break
    return bounds


def detect_boundaries(features, cfg: BoundaryConfig) -> BoundarySignal:
    """Full detection: divergence, smoothing, ratio, threshold, merge.

    Returned boundaries are frame indices where a new event begins; a boundary
    b splits events as [start, b) and [b, end).
    """
    mat = np.asarray(getattr(features, "vectors", features), dtype=np.float64)
    if mat.ndim != 2:
        raise DimensionMismatch(f"features must be 2-d, got shape {mat.shape}")
    n = mat.shape[0]
    if n == 0:
        raise TooShort("empty feature stream")
    if n == 1:
        empty = np.empty(0)
        return BoundarySignal(raw=empty, smoothed=empty.copy(), ratio=empty.copy(),
                              threshold=0.0, boundaries=[])

    diffs = mat[1:] - mat[:-1]
    sq = np.einsum("ij,ij->i", diffs, diffs)
    norms = np.maximum(np.linalg.norm(mat, axis=1), _EPS)
    cos = np.einsum("ij,ij->i", mat[:-1], mat[1:]) / (norms[:-1] * norms[1:])
    raw = sq + (1.0 - cos)

    smoothed = savgol_smooth(raw, cfg)
    # near-constant stretches leave smoothing residue many orders below the
    # signal scale; it must not win the ratio against a sub-epsilon mean
    floor = _REL_FLOOR * np.max(np.abs(smoothed), initial=0.0)
    smoothed = np.where(np.abs(smoothed) < floor, 0.0, smoothed)
    ratio = signal_ratio(smoothed, cfg)
    threshold = cfg.fixed_threshold if cfg.fixed_threshold is not None \
        else adaptive_threshold(ratio, cfg)

    candidates = np.nonzero(ratio > threshold)[0]
    if candidates.size:
        peaks = _collapse_runs(candidates, ratio, cfg.min_gap)
        bounds = [p + 1 for p in peaks]  # signal index i marks transition (i, i + 1)
        bounds = _merge_short_events(bounds, mat, cfg)
    else:
        bounds = []

    return BoundarySignal(raw=raw, smoothed=smoothed, ratio=ratio,
                          threshold=float(threshold), boundaries=bounds)
