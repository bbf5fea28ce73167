"""Scorer-agnostic metrics: pairwise ranking accuracy and motion strength error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .estimator import MotionScores
from .trainer import PairAnnotation
from .video_core import VideoClip


@dataclass(frozen=True)
class ScorerHandle:
    """Named, deterministic clip -> MotionScores function."""

    name: str
    score: Callable[[VideoClip], MotionScores]


@dataclass(frozen=True)
class EvalReport:
    object_accuracy: float | None
    camera_accuracy: float | None
    combined_accuracy: float | None
    n_evaluated_object: int
    n_evaluated_camera: int
    strength_mse: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "object_accuracy": self.object_accuracy,
            "camera_accuracy": self.camera_accuracy,
            "combined_accuracy": self.combined_accuracy,
            "n_evaluated_object": self.n_evaluated_object,
            "n_evaluated_camera": self.n_evaluated_camera,
            "strength_mse": self.strength_mse,
        }


@dataclass(frozen=True)
class StrengthError:
    object_mse: float
    camera_mse: float
    combined_mse: float


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def ranking_accuracy(scorer: ScorerHandle,
                     pairs: Sequence[tuple[VideoClip, VideoClip, PairAnnotation]],
                     ) -> EvalReport:
    """Fraction of nonzero-labeled decisions where sign(s_a - s_b) matches.

    Exact ties count as incorrect (no points are ever awarded for a tie), so a
    constant scorer scores 0. Pairs labeled 0 carry no ground-truth ordering
    and are excluded. The combined accuracy pools the decisions of both motion
    types; a motion type with no evaluable pair reports accuracy None.
    """
    correct = {"object": 0, "camera": 0}
    counts = {"object": 0, "camera": 0}
    cache: dict[int, MotionScores] = {}

    def score_of(clip: VideoClip) -> MotionScores:
        key = id(clip)
        if key not in cache:
            cache[key] = scorer.score(clip)
        return cache[key]

    any_label = False
    for clip_a, clip_b, ann in pairs:
        for kind, label in (("object", ann.object_rel), ("camera", ann.camera_rel)):
            if label == 0:
                continue
            any_label = True
            s_a = score_of(clip_a)
            s_b = score_of(clip_b)
            va, vb = (s_a.object, s_b.object) if kind == "object" else (s_a.camera, s_b.camera)
            counts[kind] += 1
            if _sign(va - vb) == _sign(label):
                correct[kind] += 1
    if not any_label:
        raise ValueError("no pair carries a nonzero label in either category")

    def acc(kind: str) -> float | None:
        return correct[kind] / counts[kind] if counts[kind] else None

    total = counts["object"] + counts["camera"]
    combined = (correct["object"] + correct["camera"]) / total if total else None
    return EvalReport(
        object_accuracy=acc("object"),
        camera_accuracy=acc("camera"),
        combined_accuracy=combined,
        n_evaluated_object=counts["object"],
        n_evaluated_camera=counts["camera"],
    )


def motion_strength_error(scorer: ScorerHandle,
                          labeled_clips: Sequence[tuple[VideoClip, tuple[float, float]]],
                          ) -> StrengthError:
    """MSE between scorer outputs and known (object, camera) intensities."""
    if not labeled_clips:
        raise ValueError("need at least one labeled clip")
    err_o = []
    err_c = []
    for clip, (gt_object, gt_camera) in labeled_clips:
        s = scorer.score(clip)
        err_o.append((s.object - gt_object) ** 2)
        err_c.append((s.camera - gt_camera) ** 2)
    mo = float(np.mean(err_o))
    mc = float(np.mean(err_c))
    return StrengthError(object_mse=mo, camera_mse=mc, combined_mse=(mo + mc) / 2.0)
