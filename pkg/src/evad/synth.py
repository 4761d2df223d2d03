"""Synthetic feature streams with planted regime structure.

Each regime holds a clip anchor (unit 512-d) and a flow anchor (128-d);
frames are noisy draws around the anchors, with optional single-frame jitter
perturbations.  The noise amplitude carries a quasi-periodic modulation that
mimics the bursty motion texture of real footage: without it the divergence
signal is implausibly flat and the adaptive threshold degenerates.  True
boundaries sit at the cumulative regime starts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .features import CLIP_DIM, FLOW_DIM, FrameFeatures

# Jitter applies one frame of extra noise at this multiple of noise_sigma.
JITTER_SCALE = 3.0

# Quasi-periodic noise-amplitude modulation (phase drifts as a random walk).
# Scaled by noise_sigma, so zero-noise streams stay exactly constant inside
# regimes.
MOD_AMPLITUDE = 0.25
MOD_PERIOD = 100
MOD_PHASE_STEP = 0.05


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    regimes: tuple  # ((length, clip_anchor, flow_anchor), ...)
    noise_sigma: float = 0.0
    jitter: float = 0.0
    fps: float = 30.0
    video_id: str = "synth"

    def __post_init__(self):
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0.0 <= self.jitter < 1.0:
            raise ValueError("jitter must be in [0, 1)")
        for length, clip_anchor, flow_anchor in self.regimes:
            if length < 1:
                raise ValueError("regime lengths must be >= 1")
            if np.asarray(clip_anchor).shape != (CLIP_DIM,):
                raise ValueError(f"clip anchors must be {CLIP_DIM}-d")
            if np.asarray(flow_anchor).shape != (FLOW_DIM,):
                raise ValueError(f"flow anchors must be {FLOW_DIM}-d")

    @property
    def n_frames(self) -> int:
        return sum(length for length, _, _ in self.regimes)


def random_spec(seed: int, n_frames: int, n_regimes: int, noise_sigma: float = 0.0,
                jitter: float = 0.0, flow_scale: float = 1.0,
                video_id: str = "synth") -> SynthSpec:
    """Random regime anchors with roughly equal regime lengths."""
    rng = np.random.default_rng(seed)
    cuts = np.linspace(0, n_frames, n_regimes + 1).astype(int)
    regimes = []
    for a, b in zip(cuts, cuts[1:]):
        clip_anchor = rng.standard_normal(CLIP_DIM)
        clip_anchor /= np.linalg.norm(clip_anchor)
        flow_anchor = rng.standard_normal(FLOW_DIM) * flow_scale
        regimes.append((int(b - a), clip_anchor, flow_anchor))
    return SynthSpec(seed=seed, regimes=tuple(regimes), noise_sigma=noise_sigma,
                     jitter=jitter, video_id=video_id)


def _noise_modulation(rng, n: int) -> np.ndarray:
    """Amplitude envelope in [1 - A, 1 + A] with a slowly wandering phase."""
    phase = np.cumsum(rng.standard_normal(n)) * MOD_PHASE_STEP + rng.uniform(0, 2 * np.pi)
    return 1.0 + MOD_AMPLITUDE * np.sin(2 * np.pi * np.arange(n) / MOD_PERIOD + phase)


def generate(spec: SynthSpec):
    """Materialize a stream; returns (FrameFeatures, truth_boundaries)."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_frames
    clip = np.empty((n, CLIP_DIM))
    flow = np.empty((n, FLOW_DIM))
    mod = _noise_modulation(rng, n)
    boundaries = []
    t = 0
    for length, clip_anchor, flow_anchor in spec.regimes:
        if t > 0:
            boundaries.append(t)
        scale = spec.noise_sigma * mod[t : t + length, None]
        clip_noise = rng.standard_normal((length, CLIP_DIM)) * scale
        flow_noise = rng.standard_normal((length, FLOW_DIM)) * scale
        jittered = rng.random(length) < spec.jitter
        extra = spec.noise_sigma * JITTER_SCALE
        clip_noise[jittered] += rng.standard_normal((int(jittered.sum()), CLIP_DIM)) * extra
        flow_noise[jittered] += rng.standard_normal((int(jittered.sum()), FLOW_DIM)) * extra
        raw_clip = clip_anchor + clip_noise
        clip[t : t + length] = raw_clip / np.linalg.norm(raw_clip, axis=1, keepdims=True)
        flow[t : t + length] = flow_anchor + flow_noise
        t += length
    frames = FrameFeatures(video_id=spec.video_id, fps=spec.fps,
                           clip=clip.astype(np.float32), flow=flow.astype(np.float32))
    return frames, boundaries
