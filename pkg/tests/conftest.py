"""Shared fixtures: small textured clips with known motion."""

from __future__ import annotations

import numpy as np
import pytest

from motionscale.video_core import VideoClip


def textured_frame(height: int, width: int, seed: int = 0) -> np.ndarray:
    """Band-limited random texture with plenty of corners, uint8."""
    rng = np.random.default_rng(seed)
    coarse = rng.uniform(40, 215, size=(height // 4 + 2, width // 4 + 2))
    ys = np.arange(height) / 4.0
    xs = np.arange(width) / 4.0
    y0 = ys.astype(int)
    x0 = xs.astype(int)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = coarse[y0][:, x0] * (1 - fx) + coarse[y0][:, x0 + 1] * fx
    bot = coarse[y0 + 1][:, x0] * (1 - fx) + coarse[y0 + 1][:, x0 + 1] * fx
    img = top * (1 - fy) + bot * fy
    img += rng.uniform(-18, 18, size=(height, width))
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def shifted_clip(frames: int, height: int, width: int, dx: int, dy: int,
                 seed: int = 0, fps: float = 8.0) -> VideoClip:
    """Clip whose every frame is the previous one shifted by integer (dx, dy).

    Rendered by cropping a larger texture, so the shift is exact.
    """
    margin_x = abs(dx) * (frames - 1) + 1
    margin_y = abs(dy) * (frames - 1) + 1
    big = textured_frame(height + 2 * margin_y, width + 2 * margin_x, seed)
    data = np.empty((frames, height, width), dtype=np.uint8)
    for t in range(frames):
        # Content moves by (+dx, +dy) per frame, so the crop window moves the
        # opposite way.
        oy = margin_y - dy * t
        ox = margin_x - dx * t
        data[t] = big[oy:oy + height, ox:ox + width]
    return VideoClip(data=data[..., np.newaxis], fps=fps)


@pytest.fixture
def static_clip() -> VideoClip:
    frame = textured_frame(64, 96, seed=4)
    data = np.repeat(frame[np.newaxis], 8, axis=0)
    return VideoClip(data=data[..., np.newaxis], fps=8.0)
