"""SSIM and the inter-frame-SSIM motion proxy used as the comparison baseline.

The baseline maps mean inter-frame dissimilarity to a single intensity and
reports it for both motion types: a coupled score that cannot separate object
from camera motion, which is exactly what the learned estimator is measured
against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import MotionScores
from .video_core import VideoClip, to_grayscale


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    ax = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(ax**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


@dataclass(frozen=True)
class SsimConfig:
    window_size: int = 11
    sigma: float = 1.5
    dynamic_range: float = 255.0

    @property
    def c1(self) -> float:
        return (0.01 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (0.03 * self.dynamic_range) ** 2

    @property
    def window(self) -> np.ndarray:
        return _gaussian_window(self.window_size, self.sigma)


def ssim(a: np.ndarray, b: np.ndarray, cfg: SsimConfig = SsimConfig()) -> float:
    """Structural similarity between two luma images, in [-1, 1].

    Gaussian-weighted local statistics, averaged over fully interior window
    positions only (no padding).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    k = cfg.window_size
    if a.shape[0] < k or a.shape[1] < k:
        raise ValueError(f"images smaller than the {k}x{k} window")
    w = cfg.window

    def filt(img: np.ndarray) -> np.ndarray:
        views = np.lib.stride_tricks.sliding_window_view(img, (k, k))
        return np.tensordot(views, w, axes=([2, 3], [0, 1]))

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a**2
    var_b = filt(b * b) - mu_b**2
    cov = filt(a * b) - mu_a * mu_b
    c1, c2 = cfg.c1, cfg.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class SsimCalibration:
    """Maps mean inter-frame dissimilarity m to the [1, 10] scale."""

    m_max: float = 0.5

    def __post_init__(self) -> None:
        if self.m_max <= 0:
            raise ValueError("m_max must be positive")


def ssim_motion_score(clip: VideoClip, cal: SsimCalibration = SsimCalibration(),
                      cfg: SsimConfig = SsimConfig()) -> MotionScores:
    """Coupled motion intensity from inter-frame SSIM.

    m is the mean of (1 - ssim) over consecutive frame pairs; the score
    1 + 9 * clamp(m / m_max, 0, 1) is reported for BOTH the object and camera
    fields, since a single dissimilarity number cannot decouple them.
    """
    if clip.frames < 2:
        raise ValueError("motion score needs at least 2 frames")
    gray = to_grayscale(clip)
    dissim = [1.0 - ssim(gray.data[i], gray.data[i + 1], cfg)
              for i in range(clip.frames - 1)]
    m = float(np.mean(dissim))
    score = float(1.0 + 9.0 * np.clip(m / cal.m_max, 0.0, 1.0))
    return MotionScores(object=score, camera=score)
