"""Command-line entry point: segment, score, evaluate, sweep, synth, validate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, synth
from .errors import DegenerateLabels, EvadError, ScorerUnavailable
from .features import read_features, write_features
from .pipeline import RunConfig, score_stream, segment_stream
from .scoring import HttpScorer, MockScorer

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SCORER = 3
EXIT_DEGENERATE = 4

DEFAULT_ALPHAS = [0.0, 0.25, 0.5, 0.75, 1.0]
DEFAULT_GAMMAS = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0]

_FLOAT_KEYS = {"alpha", "gamma", "mad_k", "fixed_threshold"}
_INT_KEYS = {"window", "seed", "k", "iterations", "w", "min_gap", "min_event_len", "jobs"}


def _coerce(key: str, value: str):
    if key in _FLOAT_KEYS:
        return float(value)
    if key in _INT_KEYS:
        return int(value)
    return value


def _read_config_file(path: str) -> dict:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise EvadError(f"{path}:{lineno}: expected key = value")
        key, _, raw = line.partition("=")
        values[key.strip()] = _coerce(key.strip(), raw.strip())
    return values


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--window", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--iterations", type=int)
    parser.add_argument("--w", type=int)
    parser.add_argument("--mad-k", dest="mad_k", type=float)
    parser.add_argument("--min-gap", dest="min_gap", type=int)
    parser.add_argument("--min-event-len", dest="min_event_len", type=int)
    parser.add_argument("--scorer-url", dest="scorer_url")
    parser.add_argument("--mock-scorer", dest="mock_scorer", action="store_true")
    parser.add_argument("--fixed-threshold", dest="fixed_threshold", type=float)
    parser.add_argument("--jobs", type=int)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Precedence: flags > config file > environment (scorer url) > defaults."""
    values = RunConfig().to_dict()
    env_url = os.environ.get("EVENTVAD_SCORER_URL")
    if env_url:
        values["scorer_url"] = env_url
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for key in values:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if getattr(args, "mock_scorer", False):
        values["scorer_url"] = "mock"
    return RunConfig.from_dict(values)


def make_scorer(cfg: RunConfig):
    if cfg.scorer_url == "mock":
        return MockScorer()
    return HttpScorer(cfg.scorer_url)


def _media_loader(media_dir):
    if media_dir is None:
        return None
    media_dir = Path(media_dir)

    def frames_for(unit):
        frames = []
        for idx in unit.sampled_frames:
            path = media_dir / f"frame_{idx:06d}.jpg"
            if path.exists():
                frames.append(path.read_bytes())
        return frames

    return frames_for


def cmd_segment(args) -> int:
    cfg = resolve_config(args)
    frames = read_features(args.features)
    signal = segment_stream(frames, cfg)
    out_dir = Path(args.out_dir or Path(args.features).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.features).stem
    (out_dir / f"{stem}.curve.csv").write_text(signal.export_csv())
    (out_dir / f"{stem}.boundaries.json").write_text(signal.export_json())
    print(f"{stem}: {len(signal.boundaries)} boundaries, threshold {signal.threshold:.6f}")
    return EXIT_OK


def cmd_score(args) -> int:
    cfg = resolve_config(args)
    frames = read_features(args.features)
    scorer = make_scorer(cfg)
    result = score_stream(frames, cfg, scorer, frames_for=_media_loader(args.media))
    out_dir = Path(args.out_dir or Path(args.features).parent)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{Path(args.features).stem}.result.json"
    out_path.write_text(result.to_json())
    print(f"wrote {out_path} ({len(result.events)} events)")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    truth = evaluation.read_annotations(args.annotations)
    results_dir = Path(args.results_dir)
    result_files = sorted(results_dir.glob("*.result.json"))
    if not result_files:
        raise EvadError(f"NoResults: no *.result.json under {results_dir}")
    all_scores, all_labels = [], []
    per_video = {}
    for path in result_files:
        payload = json.loads(path.read_text())
        video_id = payload["video_id"]
        if video_id not in truth:
            raise EvadError(f"{path}: no annotations for {video_id}")
        labels = truth[video_id].frame_labels()
        scores = np.asarray(payload["frame_scores"], dtype=np.float64)
        if len(scores) != len(labels):
            raise EvadError(
                f"{path}: {len(scores)} scores but {len(labels)} annotated frames"
            )
        all_scores.append(scores)
        all_labels.append(labels)
        entry = {"n_frames": len(labels), "n_positive": int(labels.sum())}
        if 0 < labels.sum() < len(labels):
            entry["auc"] = evaluation.auc_roc(scores, labels)
            entry["ap"] = evaluation.average_precision(scores, labels)
        per_video[video_id] = entry
    scores = np.concatenate(all_scores)
    labels = np.concatenate(all_labels)
    report = evaluation.metric_report(scores, labels)
    payload = {
        "auc": report.auc,
        "ap": report.ap,
        "n_frames": report.n_frames,
        "n_positive": report.n_positive,
        "per_video": per_video,
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    print(text)
    return EXIT_OK


def _sweep_value(features_paths, truth_by_stem, annotations, cfg: RunConfig,
                 use_scorer: bool, tolerance: int) -> float:
    if use_scorer:
        scorer = make_scorer(cfg)
        all_scores, all_labels = [], []
        for path in features_paths:
            frames = read_features(path)
            result = score_stream(frames, cfg, scorer)
            labels = annotations[frames.video_id].frame_labels()
            all_scores.append(result.frame_scores)
            all_labels.append(labels)
        return evaluation.auc_roc(np.concatenate(all_scores), np.concatenate(all_labels))
    predicted, truths = [], []
    offset = 0
    for path in features_paths:
        frames = read_features(path)
        signal = segment_stream(frames, cfg)
        truth = truth_by_stem[Path(path).stem]
        predicted.extend(b + offset for b in signal.boundaries)
        truths.extend(b + offset for b in truth)
        offset += frames.n_frames + 10_000  # keep videos from matching across files
    _, _, f1 = evaluation.boundary_prf(predicted, truths, tolerance=tolerance)
    return f1


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else DEFAULT_ALPHAS
    gammas = [float(g) for g in args.gammas.split(",")] if args.gammas else DEFAULT_GAMMAS
    features_paths = sorted(Path(args.features_dir).glob("*.evf"))
    if not features_paths:
        raise EvadError(f"no .evf files under {args.features_dir}")
    use_scorer = args.annotations is not None
    annotations = evaluation.read_annotations(args.annotations) if use_scorer else {}
    truth_by_stem = {}
    if not use_scorer:
        for path in features_paths:
            truth_path = path.with_suffix(".truth.json")
            if not truth_path.exists():
                raise EvadError(f"missing truth file {truth_path}")
            truth_by_stem[path.stem] = json.loads(truth_path.read_text())["boundaries"]
    rows = [["gamma\\alpha"] + [f"{a:g}" for a in alphas]]
    for gamma in gammas:
        row = [f"{gamma:g}"]
        for alpha in alphas:
            cell_cfg = RunConfig.from_dict({**cfg.to_dict(), "alpha": alpha, "gamma": gamma})
            value = _sweep_value(features_paths, truth_by_stem, annotations,
                                 cell_cfg, use_scorer, args.tolerance)
            row.append(f"{value:.6f}")
        rows.append(row)
    text = "\n".join(",".join(row) for row in rows) + "\n"
    Path(args.out).write_text(text)
    print(text, end="")
    return EXIT_OK


def cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        seed = args.seed + i
        video_id = f"synth_{seed:05d}"
        spec = synth.random_spec(seed=seed, n_frames=args.frames, n_regimes=args.regimes,
                                 noise_sigma=args.noise_sigma, jitter=args.jitter,
                                 flow_scale=args.flow_scale, video_id=video_id)
        frames, boundaries = synth.generate(spec)
        path = out_dir / f"{video_id}.evf"
        write_features(frames, path)
        path.with_suffix(".truth.json").write_text(json.dumps({"boundaries": boundaries}))
        print(f"wrote {path} ({frames.n_frames} frames, {len(boundaries)} boundaries)")
    return EXIT_OK


def cmd_validate(args) -> int:
    frames = read_features(args.features)
    print(f"{args.features}: OK ({frames.n_frames} frames at {frames.fps:g} fps)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evad",
                                     description="Event-aware video anomaly detection engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="detect event boundaries in a feature file")
    p.add_argument("features")
    p.add_argument("-o", "--out-dir", dest="out_dir")
    add_run_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("score", help="segment and score a feature file")
    p.add_argument("features")
    p.add_argument("--media", help="directory of frame_NNNNNN.jpg files")
    p.add_argument("-o", "--out-dir", dest="out_dir")
    add_run_flags(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="frame-level AUC/AP over a results directory")
    p.add_argument("results_dir")
    p.add_argument("annotations")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="alpha x gamma hyperparameter grid")
    p.add_argument("features_dir")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--annotations")
    p.add_argument("--alphas", help="comma-separated alpha values")
    p.add_argument("--gammas", help="comma-separated gamma values")
    p.add_argument("--tolerance", type=int, default=30,
                   help="boundary match tolerance (frames) for the F1 surface")
    add_run_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate synthetic feature streams")
    p.add_argument("out_dir")
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--regimes", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.1)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--flow-scale", dest="flow_scale", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="validate a .evf container")
    p.add_argument("features")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScorerUnavailable as exc:
        print(f"error: scorer unavailable: {exc}", file=sys.stderr)
        return EXIT_SCORER
    except DegenerateLabels as exc:
        print(f"error: degenerate evaluation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (EvadError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
