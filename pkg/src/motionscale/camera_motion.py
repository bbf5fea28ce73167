"""Robust per-frame-pair global affine motion estimation.

The global affine fitted over tracked correspondences is the camera-motion
hypothesis; foreground (object) motion shows up as its outliers/residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tracking import Trajectory

#: Side of the uniform grid used to scalarize an affine into one displacement.
EVAL_GRID = 8


def eval_grid_points(height: int, width: int, n: int = EVAL_GRID) -> np.ndarray:
    """Uniform n-by-n grid of evaluation points over the frame, shape (n*n, 2)."""
    xs = np.linspace(0.0, width - 1.0, n)
    ys = np.linspace(0.0, height - 1.0, n)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


@dataclass(frozen=True)
class RansacConfig:
    inlier_threshold_px: float = 1.5
    confidence: float = 0.999
    max_iterations: int = 2000
    seed: int = 0


@dataclass(frozen=True)
class AffineMotion:
    """Global inter-frame motion model p' = A p + t with inlier statistics."""

    a11: float
    a12: float
    a21: float
    a22: float
    tx: float
    ty: float
    inlier_count: int
    inlier_rms: float

    def __post_init__(self) -> None:
        vals = (self.a11, self.a12, self.a21, self.a22, self.tx, self.ty)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("affine entries must be finite")
        det = self.a11 * self.a22 - self.a12 * self.a21
        if abs(det - 1.0) > 0.5:
            raise ValueError(f"implausible camera motion: |det - 1| = {abs(det - 1.0):.3f} > 0.5")
        if self.inlier_count < 3:
            raise ValueError("affine model needs at least 3 inliers")

    @property
    def linear(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty])

    def apply(self, pts: np.ndarray) -> np.ndarray:
        """Transform points, shape (n, 2)."""
        return pts @ self.linear.T + self.translation


@dataclass(frozen=True)
class CameraPath:
    """Per-frame-pair motion models for pairs (0,1), (1,2), ..."""

    models: tuple[AffineMotion, ...]
    displacements: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.models) != len(self.displacements):
            raise ValueError("models and displacements must align")

    @property
    def mean_displacement(self) -> float:
        return float(np.mean(self.displacements))


def _solve_affine(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Least-squares affine from src to dst points; None when degenerate.

    Returns a (2, 3) matrix [A | t].
    """
    n = src.shape[0]
    design = np.hstack([src, np.ones((n, 1))])
    gram = design.T @ design
    if abs(np.linalg.det(gram)) < 1e-8:
        return None
    sol, *_ = np.linalg.lstsq(design, dst, rcond=None)
    return sol.T  # (2, 3)


def fit_global_affine(correspondences: list[tuple[np.ndarray, np.ndarray]] | np.ndarray,
                      cfg: RansacConfig = RansacConfig()) -> AffineMotion:
    """RANSAC affine fit over (p, q) point pairs.

    Minimal samples of 3, adaptive iteration count for the configured
    confidence (capped), then a least-squares refit on the largest inlier set.
    Fully deterministic for a fixed seed.
    """
    pairs = np.asarray([(p[0], p[1], q[0], q[1]) for p, q in correspondences], dtype=np.float64) \
        if not isinstance(correspondences, np.ndarray) else np.asarray(correspondences, dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[1] != 4:
        raise ValueError("correspondences must be (n, 4) as x, y, x', y'")
    n = pairs.shape[0]
    if n < 3:
        raise ValueError("underdetermined: need at least 3 correspondences")
    src = pairs[:, :2]
    dst = pairs[:, 2:]

    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xAF1E]))
    thresh2 = cfg.inlier_threshold_px**2
    best_mask: np.ndarray | None = None
    best_count = 0
    max_iters = cfg.max_iterations
    it = 0
    while it < max_iters:
        it += 1
        sample = rng.choice(n, size=3, replace=False)
        tri = src[sample]
        area2 = abs((tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1])
                    - (tri[2, 0] - tri[0, 0]) * (tri[1, 1] - tri[0, 1]))
        if area2 < 1e-9:
            continue
        model = _solve_affine(tri, dst[sample])
        if model is None:
            continue
        residual2 = np.sum((src @ model[:, :2].T + model[:, 2] - dst) ** 2, axis=1)
        mask = residual2 <= thresh2
        count = int(np.count_nonzero(mask))
        if count > best_count:
            best_count = count
            best_mask = mask
            ratio = count / n
            if 0.0 < ratio < 1.0:
                needed = math.log(1.0 - cfg.confidence) / math.log(1.0 - ratio**3)
                max_iters = min(cfg.max_iterations, int(math.ceil(needed)))
            elif ratio >= 1.0:
                break
    if best_mask is None or best_count < 3:
        raise RuntimeError("RANSAC failed: all minimal samples degenerate (collinear points?)")

    refit = _solve_affine(src[best_mask], dst[best_mask])
    if refit is None:
        raise RuntimeError("RANSAC refit degenerate")
    residual2 = np.sum((src @ refit[:, :2].T + refit[:, 2] - dst) ** 2, axis=1)
    inliers = residual2 <= thresh2
    count = int(np.count_nonzero(inliers))
    rms = float(np.sqrt(np.mean(residual2[inliers]))) if count else float("inf")
    return AffineMotion(
        a11=float(refit[0, 0]), a12=float(refit[0, 1]),
        a21=float(refit[1, 0]), a22=float(refit[1, 1]),
        tx=float(refit[0, 2]), ty=float(refit[1, 2]),
        inlier_count=count, inlier_rms=rms,
    )


def camera_displacement(model: AffineMotion, height: int, width: int) -> float:
    """Mean |A p - p| over a uniform 8x8 grid covering the frame.

    Scalarizes any affine into one displacement; pure translation (dx, dy)
    yields exactly hypot(dx, dy).
    """
    pts = eval_grid_points(height, width)
    return float(np.mean(np.linalg.norm(model.apply(pts) - pts, axis=1)))


def displacements_to_csv(path: CameraPath) -> str:
    """Per-pair displacement dump: one row per consecutive frame pair."""
    lines = ["pair_index,displacement_px"]
    for i, d in enumerate(path.displacements):
        lines.append(f"{i},{d!r}")
    return "\n".join(lines) + "\n"


def estimate_camera_path(trajectories: list[Trajectory], height: int, width: int,
                         cfg: RansacConfig = RansacConfig()) -> CameraPath:
    """Fit one affine per consecutive frame pair from trajectories valid in both."""
    if not trajectories:
        raise ValueError("no trajectories")
    frames = trajectories[0].positions.shape[0]
    pos = np.stack([t.positions for t in trajectories], axis=1)  # (frames, n, 2)
    val = np.stack([t.valid for t in trajectories], axis=1)  # (frames, n)
    models = []
    displacements = []
    for t in range(frames - 1):
        both = val[t] & val[t + 1]
        if np.count_nonzero(both) < 3:
            raise RuntimeError(
                f"frame pair ({t}, {t + 1}) has fewer than 3 valid correspondences"
            )
        pairs = np.hstack([pos[t, both], pos[t + 1, both]])
        pair_cfg = RansacConfig(
            inlier_threshold_px=cfg.inlier_threshold_px,
            confidence=cfg.confidence,
            max_iterations=cfg.max_iterations,
            seed=cfg.seed ^ t,
        )
        model = fit_global_affine(pairs, pair_cfg)
        models.append(model)
        displacements.append(camera_displacement(model, height, width))
    return CameraPath(models=tuple(models), displacements=tuple(displacements))
