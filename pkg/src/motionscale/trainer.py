"""Contrastive training: pairwise ranking losses, pseudo-label regression,
significance-weighted totals, and Adam optimization."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .estimator import (EstimatorConfig, EstimatorParams, MotionScores,
                        backward, clip_to_input, forward, init_params)
from .pseudo_label import MotionLabels
from .video_core import VideoClip

VALID_RELS = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class PairAnnotation:
    """Relative-motion record for one video pair.

    ``object_rel``/``camera_rel`` say which clip moves more (+ means clip a)
    and whether the gap is significant (|2|) or slight (|1|). Object
    comparisons are only meaningful when at least one clip has a moving
    object, so records with both flags 0 and a nonzero object_rel are
    rejected.
    """

    pair_id: str
    clip_a: str
    clip_b: str
    object_a_moving: int
    object_b_moving: int
    object_rel: int
    camera_rel: int
    annotator_id: str | None = None
    timestamp: float | None = None

    def __post_init__(self) -> None:
        if self.object_a_moving not in (0, 1) or self.object_b_moving not in (0, 1):
            raise ValueError(f"{self.pair_id}: moving-object flags must be 0 or 1")
        if self.object_rel not in VALID_RELS or self.camera_rel not in VALID_RELS:
            raise ValueError(f"{self.pair_id}: relative labels must be in -2..2")
        if self.object_rel != 0 and not (self.object_a_moving or self.object_b_moving):
            raise ValueError(
                f"{self.pair_id}: object comparison recorded but neither clip "
                "has a moving object"
            )

    def to_json_dict(self) -> dict:
        return {
            "pair_id": self.pair_id, "clip_a": self.clip_a, "clip_b": self.clip_b,
            "object_a_moving": self.object_a_moving,
            "object_b_moving": self.object_b_moving,
            "object_rel": self.object_rel, "camera_rel": self.camera_rel,
            "annotator_id": self.annotator_id, "timestamp": self.timestamp,
        }

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "PairAnnotation":
        required = ("pair_id", "clip_a", "clip_b", "object_a_moving",
                    "object_b_moving", "object_rel", "camera_rel")
        missing = [k for k in required if k not in d]
        if missing:
            raise ValueError(f"annotation record missing fields: {missing}")
        return cls(
            pair_id=str(d["pair_id"]), clip_a=str(d["clip_a"]), clip_b=str(d["clip_b"]),
            object_a_moving=int(d["object_a_moving"]),
            object_b_moving=int(d["object_b_moving"]),
            object_rel=int(d["object_rel"]), camera_rel=int(d["camera_rel"]),
            annotator_id=d.get("annotator_id"),
            timestamp=None if d.get("timestamp") is None else float(d["timestamp"]),
        )


def load_annotations(path) -> list[PairAnnotation]:
    """Read JSONL annotations; unknown fields are ignored, invalid records raise."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(PairAnnotation.from_json_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out


def save_annotations(annotations: Sequence[PairAnnotation], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ann in annotations:
            fh.write(json.dumps(ann.to_json_dict(), sort_keys=True) + "\n")


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 0.1  # regression weight in the total loss
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    margin: float = 0.0
    batch_size: int = 8
    epochs: int = 30
    regression_fraction: float = 0.25  # fraction of clips given pseudo-label regression
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lam must be >= 0")
        if not 0.0 < self.regression_fraction <= 1.0:
            raise ValueError("regression_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class LossBreakdown:
    """Per-pair loss components; total = w_o*L_o + w_c*L_c + lam*L_r."""

    l_object: float
    l_camera: float
    l_regression: float
    total: float
    active_object: bool
    active_camera: bool
    weight_object: int
    weight_camera: int
    pair_id: str = ""

    def identity_holds(self, lam: float, atol: float = 1e-12) -> bool:
        expected = (self.weight_object * self.l_object
                    + self.weight_camera * self.l_camera + lam * self.l_regression)
        return abs(self.total - expected) <= atol


def ranking_losses(scores_a: MotionScores, scores_b: MotionScores,
                   ann: PairAnnotation, margin: float = 0.0,
                   ) -> tuple[float, float, tuple[int, int], tuple[bool, bool]]:
    """Hinge losses per motion type with significance weights.

    For label l != 0 the scores are ordered by sign(l) into (hi, lo) and the
    loss is max(0, lo - hi + margin); |l| = 2 doubles the weight. Label 0
    deactivates the term (loss 0, weight 1).
    """
    def one(label: int, s_a: float, s_b: float) -> tuple[float, int, bool]:
        if label == 0:
            return 0.0, 1, False
        hi, lo = (s_a, s_b) if label > 0 else (s_b, s_a)
        return max(0.0, lo - hi + margin), (2 if abs(label) == 2 else 1), True

    l_o, w_o, active_o = one(ann.object_rel, scores_a.object, scores_b.object)
    l_c, w_c, active_c = one(ann.camera_rel, scores_a.camera, scores_b.camera)
    return l_o, l_c, (w_o, w_c), (active_o, active_c)


def _ranking_grads(label: int, s_a: float, s_b: float, margin: float,
                   weight: int) -> tuple[float, float]:
    """d(weight * hinge)/d s_a, d/d s_b for one motion type."""
    if label == 0:
        return 0.0, 0.0
    hi, lo = (s_a, s_b) if label > 0 else (s_b, s_a)
    if lo - hi + margin <= 0.0:
        return 0.0, 0.0
    g_hi, g_lo = -float(weight), float(weight)
    return (g_hi, g_lo) if label > 0 else (g_lo, g_hi)


def regression_loss(scores: MotionScores, labels: MotionLabels) -> float:
    """Squared error of both scores against the pseudo-labels."""
    return (scores.object - labels.object) ** 2 + (scores.camera - labels.camera) ** 2


def total_loss(l_object: float, l_camera: float, weights: tuple[int, int],
               l_regression: float, lam: float) -> float:
    return weights[0] * l_object + weights[1] * l_camera + lam * l_regression


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n))


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState,
              cfg: TrainConfig, step_index: int) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update. ``step_index`` is 1-based."""
    if not np.all(np.isfinite(grads)):
        raise ValueError("non-finite gradients: halting instead of diverging")
    if params.shape != grads.shape:
        raise ValueError("parameter/gradient shape mismatch")
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads**2
    m_hat = m / (1.0 - cfg.beta1**step_index)
    v_hat = v / (1.0 - cfg.beta2**step_index)
    new_params = params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps_adam)
    return new_params, AdamState(m=m, v=v)


@dataclass(frozen=True)
class TrainingPair:
    """One training pair with its clips resolved in memory."""

    annotation: PairAnnotation
    clip_a: VideoClip
    clip_b: VideoClip


def select_regression_subset(clip_ids: Sequence[str], fraction: float,
                             seed: int) -> set[str]:
    """Seeded, epoch-stable choice of the clips that receive regression loss."""
    ids = sorted(set(clip_ids))
    n = max(1, int(round(fraction * len(ids))))
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x5EB5]))
    chosen = rng.choice(len(ids), size=min(n, len(ids)), replace=False)
    return {ids[i] for i in sorted(chosen)}


def train(pairs: Sequence[TrainingPair], pseudo: Mapping[str, MotionLabels],
          cfg: TrainConfig, est_cfg: EstimatorConfig,
          params: EstimatorParams | None = None,
          progress: Callable[[int, float], None] | None = None,
          epoch_callback: Callable[[int, EstimatorParams], None] | None = None,
          ) -> tuple[EstimatorParams, list[LossBreakdown]]:
    """Train the estimator on relatively-annotated pairs.

    Per pair: forward both clips, ranking hinges per Eq.-style ordering rules,
    squared-error regression for clips in the seeded regression subset, one
    Adam step per mini-batch with gradients averaged over the batch's pairs.
    Bitwise deterministic for fixed seeds and inputs.
    """
    if not pairs:
        raise ValueError("empty training dataset")
    clip_ids = [p.annotation.clip_a for p in pairs] + [p.annotation.clip_b for p in pairs]
    subset = select_regression_subset(clip_ids, cfg.regression_fraction, cfg.seed)
    missing = [c for c in sorted(subset) if c not in pseudo]
    if missing:
        raise ValueError(f"regression subset lacks pseudo-labels for: {missing[:5]}")

    if params is None:
        params = init_params(est_cfg, seed=cfg.seed)
    flat = params.flatten()
    state = AdamState.zeros(flat.size)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x0DD5]))
    history: list[LossBreakdown] = []
    step = 0

    inputs: dict[str, np.ndarray] = {}

    def input_for(name: str, clip: VideoClip) -> np.ndarray:
        if name not in inputs:
            inputs[name] = clip_to_input(clip)
        return inputs[name]

    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(len(pairs))
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            grad_sum = np.zeros_like(flat)
            for i in batch:
                pair = pairs[i]
                ann = pair.annotation
                scores_a, cache_a = forward(params, input_for(ann.clip_a, pair.clip_a))
                scores_b, cache_b = forward(params, input_for(ann.clip_b, pair.clip_b))

                l_o, l_c, weights, activity = ranking_losses(
                    scores_a, scores_b, ann, cfg.margin)
                ga_o, gb_o = _ranking_grads(ann.object_rel, scores_a.object,
                                            scores_b.object, cfg.margin, weights[0])
                ga_c, gb_c = _ranking_grads(ann.camera_rel, scores_a.camera,
                                            scores_b.camera, cfg.margin, weights[1])

                l_r = 0.0
                up_a = [ga_o, ga_c]
                up_b = [gb_o, gb_c]
                for name, scores, up in ((ann.clip_a, scores_a, up_a),
                                         (ann.clip_b, scores_b, up_b)):
                    if name in subset:
                        labels = pseudo[name]
                        l_r += regression_loss(scores, labels)
                        up[0] += cfg.lam * 2.0 * (scores.object - labels.object)
                        up[1] += cfg.lam * 2.0 * (scores.camera - labels.camera)

                total = total_loss(l_o, l_c, weights, l_r, cfg.lam)
                history.append(LossBreakdown(
                    l_object=l_o, l_camera=l_c, l_regression=l_r, total=total,
                    active_object=activity[0], active_camera=activity[1],
                    weight_object=weights[0], weight_camera=weights[1],
                    pair_id=ann.pair_id,
                ))
                grad_sum += backward(params, cache_a, (up_a[0], up_a[1]))
                grad_sum += backward(params, cache_b, (up_b[0], up_b[1]))

            step += 1
            flat, state = adam_step(flat, grad_sum / len(batch), state, cfg, step)
            params = params.with_flat(flat)
            if progress is not None:
                progress(step, history[-1].total)
        if epoch_callback is not None:
            epoch_callback(epoch, params)

    return params, history


def history_to_csv(history: Sequence[LossBreakdown]) -> str:
    """Training log: one row per processed pair."""
    lines = ["step,l_object,l_camera,l_regression,total"]
    for i, h in enumerate(history):
        lines.append(f"{i},{h.l_object!r},{h.l_camera!r},{h.l_regression!r},{h.total!r}")
    return "\n".join(lines) + "\n"
