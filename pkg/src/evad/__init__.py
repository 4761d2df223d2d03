"""Training-free event-aware video anomaly detection engine."""

from .pipeline import RunConfig, score_stream, segment_stream

__all__ = ["RunConfig", "score_stream", "segment_stream"]
