"""Event formation and two-stage describe-then-score anomaly scoring.

Boundaries tile the video into half-open event units.  Each unit is sent to a
scorer which first describes the sampled frames, then returns an anomaly
score derived from that description.  Frame-level scores are the piecewise-
constant extension of the per-event scores.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import requests

from .errors import ScorerUnavailable

MAX_SAMPLED_FRAMES = 16
MAX_RETRIES = 3

STAGE1_PROMPT = "Describe the surface and latent semantic content of these frames."
STAGE2_PROMPT = "Given this description: <D>. Output only an anomaly score between 0 and 1."

_NUMBER_RE = re.compile(r"[-+]?\d*\.?\d+(?:[eE][-+]?\d+)?")


@dataclass(frozen=True)
class EventUnit:
    index: int
    start: int
    end: int
    sampled_frames: tuple

    @classmethod
    def from_range(cls, index: int, start: int, end: int) -> "EventUnit":
        if start >= end:
            raise ValueError(f"empty event [{start}, {end})")
        count = min(MAX_SAMPLED_FRAMES, end - start)
        # uniform spacing over [start, end), endpoints included when possible
        picks = np.linspace(start, end - 1, count)
        sampled = tuple(sorted(set(int(round(p)) for p in picks)))
        return cls(index=index, start=start, end=end, sampled_frames=sampled)


@dataclass(frozen=True)
class EventScore:
    description: str
    score: float
    attempts: int


@dataclass(frozen=True)
class DetectionResult:
    video_id: str
    fps: float
    events: tuple  # ((EventUnit, EventScore), ...)
    frame_scores: np.ndarray
    provenance: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "video_id": self.video_id,
            "fps": self.fps,
            "config": self.provenance.get("config", {}),
            "seeds": self.provenance.get("seeds", {}),
            "flags": self.provenance.get("flags", []),
            "events": [
                {
                    "index": unit.index,
                    "start": unit.start,
                    "end": unit.end,
                    "score": score.score,
                    "description": score.description,
                }
                for unit, score in self.events
            ],
            "frame_scores": [float(s) for s in self.frame_scores],
        }
        return json.dumps(payload, sort_keys=True)


def events_from_boundaries(n_frames: int, boundaries) -> list[EventUnit]:
    """Tile [0, n_frames) into events split at each boundary."""
    edges = [0] + list(boundaries) + [n_frames]
    for a, b in zip(edges, edges[1:]):
        if a >= b:
            raise ValueError(f"invalid boundary layout: {boundaries} for T={n_frames}")
    return [
        EventUnit.from_range(i, start, end)
        for i, (start, end) in enumerate(zip(edges, edges[1:]))
    ]


class Scorer:
    """Two-stage scorer interface; stage 2 replies are free text holding a number."""

    def describe(self, video_id: str, event: EventUnit, frames: list[bytes]) -> str:
        raise NotImplementedError

    def score_text(self, video_id: str, event: EventUnit, description: str) -> str:
        raise NotImplementedError


class MockScorer(Scorer):
    """Deterministic scorer for tests and offline runs.

    Scores come from a fixture table keyed by (start, end) or, absent an
    entry, from a stable hash of (video_id, start, end).  Tracks the maximum
    number of concurrent in-flight calls for concurrency assertions.
    """

    def __init__(self, fixture: dict | None = None):
        self.fixture = dict(fixture or {})
        self._lock = threading.Lock()
        self._in_flight = 0
        self.max_in_flight = 0

    def _enter(self):
        with self._lock:
            self._in_flight += 1
            self.max_in_flight = max(self.max_in_flight, self._in_flight)

    def _exit(self):
        with self._lock:
            self._in_flight -= 1

    def _score_for(self, video_id: str, event: EventUnit) -> float:
        key = (event.start, event.end)
        if key in self.fixture:
            return float(self.fixture[key])
        digest = hashlib.sha256(f"{video_id}:{event.start}:{event.end}".encode()).digest()
        return int.from_bytes(digest[:2], "big") / 0xFFFF

    def describe(self, video_id, event, frames):
        self._enter()
        try:
            return f"mock description of {video_id} frames [{event.start}, {event.end})"
        finally:
            self._exit()

    def score_text(self, video_id, event, description):
        self._enter()
        try:
            return f"Score: {self._score_for(video_id, event):.6f}"
        finally:
            self._exit()


class HttpScorer(Scorer):
    """Client for the /v1/describe and /v1/score wire protocol."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._session = requests.Session()

    def _post(self, endpoint: str, payload: dict) -> dict:
        try:
            resp = self._session.post(
                f"{self.base_url}{endpoint}", json=payload, timeout=self.timeout
            )
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise ScorerUnavailable(f"{endpoint}: {exc}") from exc

    def describe(self, video_id, event, frames):
        import base64

        payload = {
            "video_id": video_id,
            "event_index": event.index,
            "start_frame": event.start,
            "end_frame": event.end,
            "frames": [base64.b64encode(f).decode("ascii") for f in frames],
        }
        return str(self._post("/v1/describe", payload)["description"])

    def score_text(self, video_id, event, description):
        payload = {
            "video_id": video_id,
            "event_index": event.index,
            "description": description,
        }
        return str(self._post("/v1/score", payload)["score"])


def _parse_score(text: str) -> float | None:
    match = _NUMBER_RE.search(text)
    if match is None:
        return None
    return min(1.0, max(0.0, float(match.group())))


def score_event(event: EventUnit, video_id: str, scorer: Scorer,
                frames: list[bytes] | None = None) -> EventScore:
    """Run describe then score; retry unparseable replies, fall back to 0.5."""
    frames = frames or []
    description = scorer.describe(video_id, event, frames)
    attempts = 0
    while attempts < MAX_RETRIES + 1:
        attempts += 1
        reply = scorer.score_text(video_id, event, description)
        value = _parse_score(reply)
        if value is not None:
            return EventScore(description=description, score=value, attempts=attempts)
    return EventScore(description="UNPARSEABLE", score=0.5, attempts=attempts)


def assemble_frame_scores(scored_events, n_frames: int) -> np.ndarray:
    """Piecewise-constant frame scores from scored events tiling [0, n_frames)."""
    units = sorted(scored_events, key=lambda pair: pair[0].start)
    cursor = 0
    for unit, _ in units:
        if unit.start != cursor:
            raise ValueError(f"events do not tile [0, {n_frames}): gap at {cursor}")
        cursor = unit.end
    if cursor != n_frames:
        raise ValueError(f"events do not tile [0, {n_frames}): end at {cursor}")
    scores = np.empty(n_frames, dtype=np.float64)
    for unit, event_score in units:
        scores[unit.start : unit.end] = event_score.score
    return scores


def score_events(events, video_id: str, scorer: Scorer, max_in_flight: int = 4,
                 frames_for=None):
    """Score events concurrently with a bounded in-flight limit; order-stable."""
    results: dict[int, EventScore] = {}
    unparseable: list[int] = []

    def run(unit: EventUnit) -> tuple[int, EventScore]:
        frames = frames_for(unit) if frames_for else []
        return unit.index, score_event(unit, video_id, scorer, frames)

    with ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        for index, event_score in pool.map(run, events):
            results[index] = event_score
            if event_score.description == "UNPARSEABLE":
                unparseable.append(index)
    ordered = [(unit, results[unit.index]) for unit in events]
    return ordered, sorted(unparseable)
