"""Command-line entry points for the full pipeline.

Every subcommand accepts --seed and --config (a key=value file whose entries
fill in unspecified flags). Exit codes: 0 success, 1 runtime failure, 2 usage.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import synth as synth_mod
from .estimator import EstimatorConfig, load_params, save_params, score_clip
from .evaluation import ScorerHandle, motion_strength_error, ranking_accuracy
from .condition_embed import embed_scores, init_embed_params
from .pseudo_label import MaskSequence, compute_pseudo_labels
from .server import AnnotationStore, SessionConfig, load_manifest, serve
from .ssim_baseline import ssim_motion_score
from .trainer import (TrainConfig, TrainingPair, history_to_csv, load_annotations,
                      save_annotations, select_regression_subset, train)
from .video_core import load_clip, save_clip

DATA_ENV = "MOTIONSCALE_DATA"


def _parse_config_file(path: str) -> dict:
    """key=value per line; '#' comments; values coerced to int/float/bool/str."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(value: str, template) -> object:
    if isinstance(template, bool):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    if isinstance(template, int):
        return int(value)
    if isinstance(template, float):
        return float(value)
    return value


def _resolve(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """defaults < config file < explicit flags."""
    merged = dict(defaults)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        file_vals = _parse_config_file(cfg_path)
        unknown = sorted(set(file_vals) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        for k, v in file_vals.items():
            merged[k] = _coerce(v, defaults[k])
    for k, v in vars(args).items():
        if k in ("config", "func", "defaults", "command"):
            continue
        merged[k] = v
    return argparse.Namespace(**merged)


def _data_root(path_str: str) -> Path:
    root = os.environ.get(DATA_ENV)
    p = Path(path_str)
    if root and not p.is_absolute():
        return Path(root) / p
    return p


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

SYNTH_DEFAULTS = dict(pairs=100, frames=16, height=64, width=96, fps=8.0,
                      stress_fraction=0.0, tie_fraction=0.1, min_gap=0.5,
                      object_max=9.0, camera_max=10.0, seed=0)


def _cmd_synth(ns: argparse.Namespace) -> int:
    out_dir = _data_root(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = synth_mod.PairDatasetConfig(
        n_pairs=ns.pairs, frames=ns.frames, height=ns.height, width=ns.width,
        fps=ns.fps, stress_fraction=ns.stress_fraction, tie_fraction=ns.tie_fraction,
        min_gap=ns.min_gap, object_range=(1.0, ns.object_max),
        camera_range=(1.0, ns.camera_max), seed=ns.seed,
    )
    samples = synth_mod.generate_pair_dataset(cfg)
    manifest_lines = []
    for s in samples:
        save_clip(s.clip_a, out_dir / s.annotation.clip_a)
        save_clip(s.clip_b, out_dir / s.annotation.clip_b)
        manifest_lines.append(json.dumps({
            "pair_id": s.pair_id,
            "clip_a_path": s.annotation.clip_a,
            "clip_b_path": s.annotation.clip_b,
            "annotation": s.annotation.to_json_dict(),
            "ground_truth": {"a": asdict(s.truth_a), "b": asdict(s.truth_b)},
            "synth_spec": {"a": synth_mod.spec_to_dict(s.spec_a),
                           "b": synth_mod.spec_to_dict(s.spec_b)},
        }, sort_keys=True))
    (out_dir / "manifest.jsonl").write_text("\n".join(manifest_lines) + "\n")
    save_annotations([s.annotation for s in samples], out_dir / "annotations.jsonl")
    print(f"wrote {len(samples)} pairs to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# pseudo-label / score
# ---------------------------------------------------------------------------

PSEUDO_DEFAULTS = dict(manifest="", out="", use_masks=False, seed=0)


def _iter_manifest_clips(manifest_path: Path, use_masks: bool):
    """Yield (relative clip path, VideoClip, mask or None) for every clip."""
    records = [json.loads(line) for line in manifest_path.read_text().splitlines() if line]
    root = manifest_path.parent
    for rec in records:
        for side in ("a", "b"):
            rel = rec[f"clip_{side}_path"]
            clip = load_clip(root / rel)
            mask = None
            if use_masks and "synth_spec" in rec:
                spec = synth_mod.spec_from_dict(rec["synth_spec"][side])
                mask = MaskSequence(synth_mod.generate_masks(spec))
            yield rel, clip, mask


def _cmd_pseudo_label(ns: argparse.Namespace) -> int:
    manifest = _data_root(ns.manifest)
    lines = []
    for rel, clip, mask in _iter_manifest_clips(manifest, ns.use_masks):
        labels = compute_pseudo_labels(clip, mask=mask)
        lines.append(json.dumps({
            "clip_path": rel,
            "object": labels.object, "camera": labels.camera,
            "raw_object_px": labels.raw_object_px,
            "raw_camera_px": labels.raw_camera_px,
            "n_foreground_tracks": labels.n_foreground_tracks,
        }, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


SCORE_DEFAULTS = dict(manifest="", method="learned", checkpoint="", out="", seed=0)


def _make_scorer(method: str, checkpoint: str) -> ScorerHandle:
    if method == "ssim":
        return ScorerHandle(name="ssim", score=lambda c: ssim_motion_score(c))
    if method == "oracle":
        def oracle(clip):
            lab = compute_pseudo_labels(clip)
            from .estimator import MotionScores
            return MotionScores(object=lab.object, camera=lab.camera)
        return ScorerHandle(name="oracle", score=oracle)
    if method == "learned":
        if not checkpoint:
            raise ValueError("--checkpoint is required for the learned method")
        params = load_params(checkpoint)
        return ScorerHandle(name="learned", score=lambda c: score_clip(params, c))
    raise ValueError(f"unknown scoring method {method!r}")


def _cmd_score(ns: argparse.Namespace) -> int:
    manifest = _data_root(ns.manifest)
    scorer = _make_scorer(ns.method, ns.checkpoint)
    lines = []
    for rel, clip, _mask in _iter_manifest_clips(manifest, use_masks=False):
        if ns.method == "oracle":
            lab = compute_pseudo_labels(clip)
            rec = {"clip_path": rel, "object": lab.object, "camera": lab.camera,
                   "raw_object_px": lab.raw_object_px, "raw_camera_px": lab.raw_camera_px,
                   "n_foreground_tracks": lab.n_foreground_tracks}
        else:
            s = scorer.score(clip)
            s = s.clamped()
            rec = {"clip_path": rel, "object": s.object, "camera": s.camera,
                   "raw_object_px": None, "raw_camera_px": None,
                   "n_foreground_tracks": None}
        lines.append(json.dumps(rec, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

TRAIN_DEFAULTS = dict(manifest="", annotations="", out="checkpoint.mstn", log="",
                      pseudo_labels="", use_masks=False, epochs=30, batch_size=8,
                      learning_rate=1e-3, lam=0.1, margin=0.0,
                      regression_fraction=0.25, seed=0)


def _load_training_pairs(manifest_path: Path, annotations_path: str,
                         ) -> tuple[list[TrainingPair], dict]:
    records = [json.loads(line) for line in manifest_path.read_text().splitlines() if line]
    root = manifest_path.parent
    by_pair = {rec["pair_id"]: rec for rec in records}
    if annotations_path:
        anns = load_annotations(annotations_path)
    else:
        from .trainer import PairAnnotation
        anns = [PairAnnotation.from_json_dict(rec["annotation"]) for rec in records]
    pairs = []
    for ann in anns:
        rec = by_pair.get(ann.pair_id)
        if rec is None:
            raise ValueError(f"annotation references unknown pair {ann.pair_id!r}")
        pairs.append(TrainingPair(
            annotation=ann,
            clip_a=load_clip(root / rec["clip_a_path"]),
            clip_b=load_clip(root / rec["clip_b_path"]),
        ))
    return pairs, by_pair


def _pseudo_for_subset(pairs: list[TrainingPair], by_pair: dict,
                       cfg: TrainConfig, use_masks: bool, pseudo_file: str) -> dict:
    from .pseudo_label import MotionLabels

    if pseudo_file:
        out = {}
        for line in Path(pseudo_file).read_text().splitlines():
            if not line:
                continue
            rec = json.loads(line)
            out[rec["clip_path"]] = MotionLabels(
                object=rec["object"], camera=rec["camera"],
                raw_object_px=rec["raw_object_px"], raw_camera_px=rec["raw_camera_px"],
                n_foreground_tracks=rec["n_foreground_tracks"])
        return out
    clip_ids = [p.annotation.clip_a for p in pairs] + [p.annotation.clip_b for p in pairs]
    subset = select_regression_subset(clip_ids, cfg.regression_fraction, cfg.seed)
    clips = {}
    specs = {}
    for p in pairs:
        rec = by_pair[p.annotation.pair_id]
        clips[p.annotation.clip_a] = p.clip_a
        clips[p.annotation.clip_b] = p.clip_b
        if "synth_spec" in rec:
            specs[p.annotation.clip_a] = rec["synth_spec"]["a"]
            specs[p.annotation.clip_b] = rec["synth_spec"]["b"]
    out = {}
    for name in sorted(subset):
        mask = None
        if use_masks and name in specs:
            mask = MaskSequence(synth_mod.generate_masks(synth_mod.spec_from_dict(specs[name])))
        out[name] = compute_pseudo_labels(clips[name], mask=mask)
    return out


def _cmd_train(ns: argparse.Namespace) -> int:
    manifest = _data_root(ns.manifest)
    pairs, by_pair = _load_training_pairs(manifest, ns.annotations)
    cfg = TrainConfig(lam=ns.lam, learning_rate=ns.learning_rate, margin=ns.margin,
                      batch_size=ns.batch_size, epochs=ns.epochs,
                      regression_fraction=ns.regression_fraction, seed=ns.seed)
    first = pairs[0].clip_a
    est_cfg = EstimatorConfig(frames=first.frames, height=first.height, width=first.width)
    pseudo = _pseudo_for_subset(pairs, by_pair, cfg, ns.use_masks, ns.pseudo_labels)
    params, history = train(pairs, pseudo, cfg, est_cfg)
    save_params(params, ns.out)
    if ns.log:
        Path(ns.log).write_text(history_to_csv(history))
    print(f"trained on {len(pairs)} pairs for {cfg.epochs} epochs; "
          f"final loss {history[-1].total:.4f}; checkpoint {ns.out}")
    return 0


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

EVAL_DEFAULTS = dict(manifest="", annotations="", method="learned", checkpoint="",
                     report="", min_accuracy=-1.0, strength=False, seed=0)


def _cmd_eval(ns: argparse.Namespace) -> int:
    manifest = _data_root(ns.manifest)
    pairs, by_pair = _load_training_pairs(manifest, ns.annotations)
    scorer = _make_scorer(ns.method, ns.checkpoint)
    triples = [(p.clip_a, p.clip_b, p.annotation) for p in pairs]
    report = ranking_accuracy(scorer, triples)
    strength = None
    if ns.strength:
        labeled = []
        for p in pairs:
            rec = by_pair[p.annotation.pair_id]
            gt = rec.get("ground_truth")
            if gt:
                labeled.append((p.clip_a, (gt["a"]["intensity_object"], gt["a"]["intensity_camera"])))
                labeled.append((p.clip_b, (gt["b"]["intensity_object"], gt["b"]["intensity_camera"])))
        if labeled:
            strength = motion_strength_error(scorer, labeled)

    def fmt(v):
        return "absent" if v is None else f"{v:.4f}"

    print(f"method            : {scorer.name}")
    print(f"object_accuracy   : {fmt(report.object_accuracy)}  (n={report.n_evaluated_object})")
    print(f"camera_accuracy   : {fmt(report.camera_accuracy)}  (n={report.n_evaluated_camera})")
    print(f"combined_accuracy : {fmt(report.combined_accuracy)}")
    payload = report.to_json_dict()
    if strength is not None:
        print(f"strength_mse      : object {strength.object_mse:.4f}, "
              f"camera {strength.camera_mse:.4f}, combined {strength.combined_mse:.4f}")
        payload["strength_mse"] = strength.combined_mse
        payload["strength_mse_object"] = strength.object_mse
        payload["strength_mse_camera"] = strength.camera_mse
    if ns.report:
        Path(ns.report).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if ns.min_accuracy >= 0:
        checked = [v for v in (report.object_accuracy, report.camera_accuracy,
                               report.combined_accuracy) if v is not None]
        if not checked or min(checked) < ns.min_accuracy:
            print(f"accuracy threshold {ns.min_accuracy} not met", file=sys.stderr)
            return 1
    return 0


# ---------------------------------------------------------------------------
# embed / serve / export-annotations
# ---------------------------------------------------------------------------

EMBED_DEFAULTS = dict(object=5.0, camera=5.0, width=64, seed=0)


def _cmd_embed(ns: argparse.Namespace) -> int:
    params = init_embed_params(width=ns.width, seed=ns.seed)
    vec = embed_scores(ns.object, ns.camera, params)
    print(json.dumps([float(v) for v in vec]))
    return 0


SERVE_DEFAULTS = dict(manifest="", log="annotations.log.jsonl", host="127.0.0.1",
                      port=8765, static_dir="", seed=0)


def _cmd_serve(ns: argparse.Namespace) -> int:
    manifest = _data_root(ns.manifest)
    entries = load_manifest(manifest)
    store = AnnotationStore(ns.log, [e.pair_id for e in entries])
    cfg = SessionConfig(manifest_path=manifest, host=ns.host, port=ns.port,
                        static_dir=Path(ns.static_dir) if ns.static_dir else None)
    service = serve(cfg, store)
    httpd = service.start()
    print(f"serving {len(entries)} pairs on http://{ns.host}:{httpd.server_address[1]}/")
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        store.close()
    return 0


EXPORT_DEFAULTS = dict(log="", out="", seed=0)


def _cmd_export_annotations(ns: argparse.Namespace) -> int:
    store = AnnotationStore(ns.log, pair_ids=[])
    # Export everything the log contains, regardless of manifest membership.
    records = sorted(store._index.values(), key=lambda a: a.pair_id)
    store.close()
    text = "".join(json.dumps(a.to_json_dict(), sort_keys=True) + "\n" for a in records)
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    sub.add_argument("--config", type=str, default=None,
                     help="key=value file supplying defaults for any flag")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motionscale",
        description="Decoupled object/camera motion intensity toolkit",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    s = argparse.SUPPRESS

    p = subs.add_parser("synth", help="generate an annotated synthetic pair dataset")
    p.add_argument("--pairs", type=int, default=s)
    p.add_argument("--out", type=str, required=True)
    p.add_argument("--frames", type=int, default=s)
    p.add_argument("--height", type=int, default=s)
    p.add_argument("--width", type=int, default=s)
    p.add_argument("--fps", type=float, default=s)
    p.add_argument("--stress-fraction", dest="stress_fraction", type=float, default=s)
    p.add_argument("--tie-fraction", dest="tie_fraction", type=float, default=s)
    p.add_argument("--min-gap", dest="min_gap", type=float, default=s)
    p.add_argument("--object-max", dest="object_max", type=float, default=s)
    p.add_argument("--camera-max", dest="camera_max", type=float, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_synth, defaults={**SYNTH_DEFAULTS, "out": ""})

    p = subs.add_parser("pseudo-label", help="tracking-based oracle labels per clip")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--out", type=str, default=s)
    p.add_argument("--use-masks", dest="use_masks", action="store_true", default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_pseudo_label, defaults=PSEUDO_DEFAULTS)

    p = subs.add_parser("score", help="score clips with a chosen method")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--method", choices=("learned", "ssim", "oracle"), default=s)
    p.add_argument("--checkpoint", type=str, default=s)
    p.add_argument("--out", type=str, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_score, defaults=SCORE_DEFAULTS)

    p = subs.add_parser("train", help="train the motion estimator")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--annotations", type=str, default=s)
    p.add_argument("--out", type=str, default=s)
    p.add_argument("--log", type=str, default=s)
    p.add_argument("--pseudo-labels", dest="pseudo_labels", type=str, default=s)
    p.add_argument("--use-masks", dest="use_masks", action="store_true", default=s)
    p.add_argument("--epochs", type=int, default=s)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=s)
    p.add_argument("--learning-rate", dest="learning_rate", type=float, default=s)
    p.add_argument("--lam", type=float, default=s)
    p.add_argument("--margin", type=float, default=s)
    p.add_argument("--regression-fraction", dest="regression_fraction", type=float, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_train, defaults=TRAIN_DEFAULTS)

    p = subs.add_parser("eval", help="ranking accuracy (and optional strength MSE)")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--annotations", type=str, default=s)
    p.add_argument("--method", choices=("learned", "ssim", "oracle"), default=s)
    p.add_argument("--checkpoint", type=str, default=s)
    p.add_argument("--report", type=str, default=s)
    p.add_argument("--min-accuracy", dest="min_accuracy", type=float, default=s)
    p.add_argument("--strength", action="store_true", default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_eval, defaults=EVAL_DEFAULTS)

    p = subs.add_parser("embed", help="dump a decoupled condition embedding")
    p.add_argument("--object", type=float, default=s)
    p.add_argument("--camera", type=float, default=s)
    p.add_argument("--width", type=int, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_embed, defaults=EMBED_DEFAULTS)

    p = subs.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--manifest", type=str, required=True)
    p.add_argument("--log", type=str, default=s)
    p.add_argument("--host", type=str, default=s)
    p.add_argument("--port", type=int, default=s)
    p.add_argument("--static-dir", dest="static_dir", type=str, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_serve, defaults=SERVE_DEFAULTS)

    p = subs.add_parser("export-annotations", help="dedupe the log into clean JSONL")
    p.add_argument("--log", type=str, required=True)
    p.add_argument("--out", type=str, default=s)
    _add_common(p)
    p.set_defaults(func=_cmd_export_annotations, defaults=EXPORT_DEFAULTS)

    return parser


def cli_dispatch(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ns = _resolve(args, args.defaults)
        return args.func(ns)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures exit 1 with a message
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
