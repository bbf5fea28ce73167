"""Decoupled motion-condition embeddings and the forward-diffusion utility.

Each motion score is expanded by a sinusoidal frequency bank and a small MLP
into a half-width vector; the object and camera halves are concatenated so the
two conditions stay structurally disentangled, then added to a timestep
embedding of the same width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EmbedBranchParams:
    freqs: np.ndarray  # (half/2,) geometric frequencies
    w1: np.ndarray  # (half, half)
    b1: np.ndarray
    w2: np.ndarray  # (half, half)
    b2: np.ndarray


@dataclass(frozen=True)
class EmbedParams:
    """Independent per-motion-type branches, each producing width/2 features."""

    width: int
    object_branch: EmbedBranchParams
    camera_branch: EmbedBranchParams

    def __post_init__(self) -> None:
        if self.width % 4 != 0:
            raise ValueError("embedding width must be a multiple of 4")


def init_branch(width: int, seed: int) -> EmbedBranchParams:
    """Parameters for one branch of a width-``width`` embedding."""
    half = width // 2
    quarter = half // 2
    # Geometric frequency bank, base-10000 style.
    exponents = np.arange(quarter) / max(quarter - 1, 1)
    freqs = np.exp(-math.log(10000.0) * exponents)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xE3BD]))
    scale = 1.0 / math.sqrt(half)
    return EmbedBranchParams(
        freqs=freqs,
        w1=rng.normal(0.0, scale, size=(half, half)),
        b1=np.zeros(half),
        w2=rng.normal(0.0, scale, size=(half, half)),
        b2=np.zeros(half),
    )


def init_embed_params(width: int = 64, seed: int = 0) -> EmbedParams:
    return EmbedParams(
        width=width,
        object_branch=init_branch(width, seed * 2 + 1),
        camera_branch=init_branch(width, seed * 2 + 2),
    )


def _silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


def _branch(score: float, p: EmbedBranchParams) -> np.ndarray:
    ang = score * p.freqs
    feats = np.concatenate([np.sin(ang), np.cos(ang)])
    hidden = _silu(p.w1 @ feats + p.b1)
    return p.w2 @ hidden + p.b2


def embed_scores(object_score: float, camera_score: float,
                 params: EmbedParams) -> np.ndarray:
    """Width-D embedding: first half depends only on the object score and its
    branch parameters, second half only on the camera side."""
    return np.concatenate([
        _branch(float(object_score), params.object_branch),
        _branch(float(camera_score), params.camera_branch),
    ])


def inject(time_embedding: np.ndarray, motion_embedding: np.ndarray) -> np.ndarray:
    """Add the motion embedding to a timestep embedding of equal width."""
    time_embedding = np.asarray(time_embedding, dtype=np.float64)
    motion_embedding = np.asarray(motion_embedding, dtype=np.float64)
    if time_embedding.shape != motion_embedding.shape:
        raise ValueError(
            f"width mismatch: {time_embedding.shape} vs {motion_embedding.shape}"
        )
    return time_embedding + motion_embedding


@dataclass(frozen=True)
class NoiseSchedule:
    """Diffusion schedule: betas with derived alphas and their cumulative products."""

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray

    @classmethod
    def from_betas(cls, betas: np.ndarray) -> "NoiseSchedule":
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or betas.size < 1:
            raise ValueError("betas must be a non-empty 1-d array")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ValueError("betas must lie strictly inside (0, 1)")
        alphas = 1.0 - betas
        alpha_bars = np.cumprod(alphas)
        if np.any(np.diff(alpha_bars) >= 0.0):
            raise ValueError("alpha_bar must be strictly decreasing")
        return cls(betas=betas, alphas=alphas, alpha_bars=alpha_bars)

    @classmethod
    def linear(cls, t_steps: int = 1000, beta_start: float = 1e-4,
               beta_end: float = 2e-2) -> "NoiseSchedule":
        """Default linear schedule. alpha_bar[0] is alpha[0] (the t=0 convention)."""
        return cls.from_betas(np.linspace(beta_start, beta_end, t_steps))

    @property
    def t_steps(self) -> int:
        return self.betas.size


def forward_diffuse(z0: np.ndarray, t: int, schedule: NoiseSchedule,
                    noise: np.ndarray) -> np.ndarray:
    """Noising map z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) noise."""
    z0 = np.asarray(z0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if z0.shape != noise.shape:
        raise ValueError(f"noise shape {noise.shape} does not match z0 {z0.shape}")
    if not 0 <= t < schedule.t_steps:
        raise ValueError(f"step {t} outside [0, {schedule.t_steps})")
    ab = schedule.alpha_bars[t]
    return math.sqrt(ab) * z0 + math.sqrt(1.0 - ab) * noise
