"""Shared helpers for the test suite."""

import numpy as np
import pytest

from evad.features import CLIP_DIM, FLOW_DIM, FrameFeatures


def unit_rows(rng, t, dim=CLIP_DIM):
    rows = rng.standard_normal((t, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)


def make_frames(seed, t, video_id="test", fps=30.0, flow_scale=1.0):
    rng = np.random.default_rng(seed)
    clip = unit_rows(rng, t)
    flow = rng.standard_normal((t, FLOW_DIM)) * flow_scale
    return FrameFeatures(video_id=video_id, fps=fps, clip=clip, flow=flow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
