"""Per-frame feature containers, flow projection, stream fusion, and `.evf` I/O.

A frame is represented by a unit-norm 512-d semantic vector and a 128-d
motion vector obtained by projecting the 2-d mean optical flow through a
seeded random matrix.  Fusion concatenates the two streams with a convex
coefficient into a single 640-d vector.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimensionMismatch,
    InvalidAlpha,
    NormViolation,
    TruncatedFile,
    UnsupportedVersion,
    ZeroVector,
)

CLIP_DIM = 512
FLOW_DIM = 128
FUSED_DIM = CLIP_DIM + FLOW_DIM

EVF_MAGIC = b"EVADFEAT"
EVF_VERSION = 1

_NORM_EPS = 1e-12
_UNIT_TOL = 1e-3


# --- portable seeded normals -------------------------------------------------
# The flow projection matrix must be reproducible bit-for-bit from its seed by
# any component that emits containers, regardless of language.  We therefore
# avoid library-specific RNG streams and pin a tiny portable generator:
# splitmix64 for the integer stream and Box-Muller for normals.

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def seeded_normals(seed: int, count: int) -> np.ndarray:
    """Deterministic standard normals from a 64-bit seed (splitmix64 + Box-Muller)."""
    gen = _splitmix64(seed & _MASK64)
    out = np.empty(count, dtype=np.float64)
    i = 0
    while i < count:
        # uniforms in (0, 1]; u1 must not be 0 for the log
        u1 = ((next(gen) >> 11) + 1) * 2.0**-53
        u2 = (next(gen) >> 11) * 2.0**-53
        r = np.sqrt(-2.0 * np.log(u1))
        out[i] = r * np.cos(2.0 * np.pi * u2)
        i += 1
        if i < count:
            out[i] = r * np.sin(2.0 * np.pi * u2)
            i += 1
    return out


@dataclass(frozen=True)
class FlowProjector:
    """2x128 projection taking a mean-flow vector to the motion feature space.

    Columns are unit-norm; the matrix is a pure function of the seed.
    """

    matrix: np.ndarray
    seed: int

    @classmethod
    def from_seed(cls, seed: int) -> "FlowProjector":
        raw = seeded_normals(seed, 2 * FLOW_DIM).reshape(2, FLOW_DIM)
        norms = np.linalg.norm(raw, axis=0)
        norms[norms < _NORM_EPS] = 1.0
        return cls(matrix=raw / norms, seed=seed)


@dataclass(frozen=True)
class FrameFeatures:
    """Per-frame clip (T x 512, unit rows) and flow (T x 128) features."""

    video_id: str
    fps: float
    clip: np.ndarray
    flow: np.ndarray

    def __post_init__(self):
        clip = np.asarray(self.clip, dtype=np.float32)
        flow = np.asarray(self.flow, dtype=np.float32)
        object.__setattr__(self, "clip", clip)
        object.__setattr__(self, "flow", flow)
        if clip.ndim != 2 or clip.shape[1] != CLIP_DIM:
            raise DimensionMismatch(f"clip must be T x {CLIP_DIM}, got {clip.shape}")
        if flow.ndim != 2 or flow.shape[1] != FLOW_DIM:
            raise DimensionMismatch(f"flow must be T x {FLOW_DIM}, got {flow.shape}")
        if clip.shape[0] != flow.shape[0] or clip.shape[0] < 1:
            raise DimensionMismatch(
                f"clip/flow frame counts disagree or empty: {clip.shape[0]} vs {flow.shape[0]}"
            )
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        norms = np.linalg.norm(clip.astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > _UNIT_TOL)[0]
        if bad.size:
            raise NormViolation(
                f"clip frame {bad[0]} has norm {norms[bad[0]]:.6f}, expected 1 +/- {_UNIT_TOL}"
            )

    @property
    def n_frames(self) -> int:
        return self.clip.shape[0]


@dataclass(frozen=True)
class FusedFeatures:
    """Concatenated (alpha * clip | (1 - alpha) * flow) vectors, T x 640."""

    vectors: np.ndarray
    alpha: float

    @property
    def n_frames(self) -> int:
        return self.vectors.shape[0]


def normalize_clip(raw: np.ndarray) -> np.ndarray:
    """L2-normalize a 512-d semantic vector; rejects (near-)zero inputs."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape != (CLIP_DIM,):
        raise DimensionMismatch(f"expected ({CLIP_DIM},), got {raw.shape}")
    norm = np.linalg.norm(raw)
    if norm <= _NORM_EPS:
        raise ZeroVector(f"clip vector norm {norm} <= {_NORM_EPS}")
    return raw / max(norm, _NORM_EPS)


def project_flow(mean_flow: np.ndarray, projector: FlowProjector) -> np.ndarray:
    """Project the 2-d mean flow (dx, dy) to the 128-d motion feature."""
    mean_flow = np.asarray(mean_flow, dtype=np.float64)
    if mean_flow.shape != (2,):
        raise DimensionMismatch(f"mean flow must be 2-d, got {mean_flow.shape}")
    return projector.matrix.T @ mean_flow


def fuse(frames: FrameFeatures, alpha: float) -> FusedFeatures:
    """Concatenate alpha-weighted clip and (1-alpha)-weighted flow streams."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidAlpha(f"alpha must be in [0, 1], got {alpha}")
    fused = np.concatenate(
        [alpha * frames.clip.astype(np.float64), (1.0 - alpha) * frames.flow.astype(np.float64)],
        axis=1,
    )
    return FusedFeatures(vectors=fused, alpha=alpha)


# --- `.evf` container --------------------------------------------------------
# magic "EVADFEAT" | u32 version | u32 T | u32 clip_dim | u32 flow_dim |
# f32 fps | T*clip_dim f32 clip rows | T*flow_dim f32 flow rows.
# All integers and floats little-endian; no padding.

_HEADER = struct.Struct("<8sIIIIf")


def write_features(frames: FrameFeatures, path) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                EVF_MAGIC, EVF_VERSION, frames.n_frames, CLIP_DIM, FLOW_DIM, frames.fps
            )
        )
        fh.write(np.ascontiguousarray(frames.clip, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(frames.flow, dtype="<f4").tobytes())


def read_features(path) -> FrameFeatures:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise TruncatedFile(f"{path}: {len(blob)} bytes is shorter than the header")
    magic, version, n, clip_dim, flow_dim, fps = _HEADER.unpack_from(blob, 0)
    if magic != EVF_MAGIC:
        raise BadMagic(f"{path}: magic {magic!r}, expected {EVF_MAGIC!r}")
    if version != EVF_VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {EVF_VERSION}")
    if clip_dim != CLIP_DIM:
        raise DimensionMismatch(f"{path}: clip_dim {clip_dim}, expected {CLIP_DIM}")
    if flow_dim != FLOW_DIM:
        raise DimensionMismatch(f"{path}: flow_dim {flow_dim}, expected {FLOW_DIM}")
    expected = _HEADER.size + 4 * n * (clip_dim + flow_dim)
    if len(blob) < expected:
        raise TruncatedFile(f"{path}: {len(blob)} bytes, payload needs {expected}")
    off = _HEADER.size
    clip = np.frombuffer(blob, dtype="<f4", count=n * clip_dim, offset=off).reshape(n, clip_dim)
    off += 4 * n * clip_dim
    flow = np.frombuffer(blob, dtype="<f4", count=n * flow_dim, offset=off).reshape(n, flow_dim)
    return FrameFeatures(video_id=path.stem, fps=fps, clip=clip.copy(), flow=flow.copy())
