"""Frame-level ranking metrics, boundary matching, and annotation ingestion.

AUC-ROC is computed as the Mann-Whitney pair statistic (ties credited 0.5)
and average precision as the threshold-weighted precision sum, both written
directly from their definitions so the tie conventions are explicit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLabels, OverlappingRanges, ParseError, RangeOutOfBounds


@dataclass(frozen=True)
class GroundTruth:
    video_id: str
    total_frames: int
    anomalous_ranges: tuple  # ((start, end), ...) half-open, sorted, disjoint

    def frame_labels(self) -> np.ndarray:
        labels = np.zeros(self.total_frames, dtype=np.int8)
        for start, end in self.anomalous_ranges:
            labels[start:end] = 1
        return labels


@dataclass(frozen=True)
class MetricReport:
    auc: float
    ap: float
    n_frames: int
    n_positive: int


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError(f"scores/labels shape mismatch: {scores.shape} vs {labels.shape}")
    return scores, labels.astype(np.int8)


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # 1-based average rank
        i = j + 1
    return ranks


def auc_roc(scores, labels) -> float:
    """Fraction of (positive, negative) pairs ranked correctly, ties worth 0.5."""
    scores, labels = _check_binary(scores, labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels(f"need both classes, got {n_pos} positives of {len(labels)}")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision(scores, labels) -> float:
    """AP = sum_k (R_k - R_{k-1}) * P_k over thresholds at distinct scores."""
    scores, labels = _check_binary(scores, labels)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DegenerateLabels("average precision needs at least one positive label")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    ap = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        tp += int(sorted_labels[i : j + 1].sum())
        seen = j + 1
        recall = tp / n_pos
        precision = tp / seen
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j + 1
    return ap


def boundary_prf(predicted, truth, tolerance: int):
    """Greedy one-to-one boundary matching within +/- tolerance frames."""
    predicted = sorted(predicted)
    truth = sorted(truth)
    if not predicted and not truth:
        return 1.0, 1.0, 1.0
    matched = 0
    ti = 0
    for p in predicted:
        while ti < len(truth) and truth[ti] < p - tolerance:
            ti += 1
        if ti < len(truth) and abs(truth[ti] - p) <= tolerance:
            matched += 1
            ti += 1
    precision = matched / len(predicted) if predicted else 1.0
    recall = matched / len(truth) if truth else 1.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def read_annotations(path) -> dict[str, GroundTruth]:
    """Parse `video_id,total_frames[,start,end]` CSV rows into ground truth."""
    ranges: dict[str, list] = {}
    totals: dict[str, int] = {}
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                video_id = row[0].strip()
                total = int(row[1])
                if len(row) not in (2, 4):
                    raise ValueError(f"expected 2 or 4 columns, got {len(row)}")
                span = (int(row[2]), int(row[3])) if len(row) == 4 else None
            except (ValueError, IndexError) as exc:
                raise ParseError(f"line {lineno}: {exc}") from exc
            if video_id in totals and totals[video_id] != total:
                raise ParseError(f"line {lineno}: conflicting total_frames for {video_id}")
            totals[video_id] = total
            ranges.setdefault(video_id, [])
            if span is not None:
                start, end = span
                if not (0 <= start < end <= total):
                    raise RangeOutOfBounds(
                        f"line {lineno}: range [{start}, {end}) outside [0, {total})"
                    )
                ranges[video_id].append(span)
    out = {}
    for video_id, spans in ranges.items():
        spans.sort()
        for (s1, e1), (s2, _) in zip(spans, spans[1:]):
            if s2 < e1:
                raise OverlappingRanges(f"{video_id}: [{s1}, {e1}) overlaps at {s2}")
        out[video_id] = GroundTruth(video_id, totals[video_id], tuple(spans))
    return out


def metric_report(scores, labels) -> MetricReport:
    scores, labels = _check_binary(scores, labels)
    return MetricReport(
        auc=auc_roc(scores, labels),
        ap=average_precision(scores, labels),
        n_frames=len(labels),
        n_positive=int(labels.sum()),
    )
