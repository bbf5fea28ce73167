"""Clip containers, the `.vclip` on-disk format, grayscale conversion, and box pyramids.

Coordinate convention used throughout the package: ``x`` is the column index,
``y`` is the row index, both zero-based with pixel centers on the integer grid.
"""

from __future__ import annotations

import glob
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

VCLIP_MAGIC = b"VCLP"
VCLIP_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIf")  # magic, version, frames, height, width, channels, fps

#: Rec. 601 luma weights.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

MIN_EDGE = 8


class ClipFormatError(ValueError):
    """Raised for malformed `.vclip` files or PNG frame directories."""


def _check_dims(frames: int, height: int, width: int, channels: int) -> None:
    if frames < 1:
        raise ClipFormatError("empty clip (frames must be >= 1)")
    if height < MIN_EDGE or width < MIN_EDGE:
        raise ClipFormatError(f"clip too small: {height}x{width}, minimum {MIN_EDGE}x{MIN_EDGE}")
    if channels not in (1, 3):
        raise ClipFormatError(f"unsupported channel count {channels} (expected 1 or 3)")


@dataclass(frozen=True)
class VideoClip:
    """Fixed-size 8-bit clip stored frame-major, row-major, channel-interleaved.

    ``data`` has shape (frames, height, width, channels) with dtype uint8 and is
    read-only after construction; clips are safe to share across threads.
    """

    data: np.ndarray
    fps: float = 8.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim == 3:  # implicit single channel
            arr = arr[..., np.newaxis]
        if arr.ndim != 4:
            raise ClipFormatError(f"clip data must be 4-d (F,H,W,C), got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise ClipFormatError(f"clip data must be uint8, got {arr.dtype}")
        _check_dims(*arr.shape)
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    @property
    def diagonal(self) -> float:
        """Frame diagonal in pixels."""
        return float(np.hypot(self.height, self.width))


@dataclass(frozen=True)
class GrayClip:
    """Luma clip: real-valued samples in [0, 255], shape (frames, height, width)."""

    data: np.ndarray
    fps: float = 8.0

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ClipFormatError(f"gray clip data must be 3-d (F,H,W), got shape {arr.shape}")
        _check_dims(arr.shape[0], arr.shape[1], arr.shape[2], 1)
        if arr.size and (arr.min() < 0.0 or arr.max() > 255.0):
            raise ClipFormatError("luma samples outside [0, 255]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class ImagePyramid:
    """Coarse-to-fine stack of luma images; level 0 is full resolution."""

    levels: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if len(self.levels) < 1:
            raise ValueError("pyramid needs at least one level")

    @property
    def num_levels(self) -> int:
        return len(self.levels)


def save_clip(clip: VideoClip, path: str | Path) -> None:
    """Write a clip as a `.vclip` file. Output bytes are deterministic."""
    path = Path(path)
    header = _HEADER.pack(
        VCLIP_MAGIC, VCLIP_VERSION, clip.frames, clip.height, clip.width,
        clip.channels, float(clip.fps),
    )
    path.write_bytes(header + clip.data.tobytes())


def load_clip(path: str | Path) -> VideoClip:
    """Load a clip from a `.vclip` file or a PNG frame directory with a manifest."""
    path = Path(path)
    if path.is_dir():
        return _load_png_dir(path)
    if not path.exists():
        raise FileNotFoundError(f"clip file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ClipFormatError(f"truncated header in {path}")
    magic, version, frames, height, width, channels, fps = _HEADER.unpack_from(raw)
    if magic != VCLIP_MAGIC:
        raise ClipFormatError(f"bad magic {magic!r} in {path}")
    if version != VCLIP_VERSION:
        raise ClipFormatError(f"unsupported vclip version {version}")
    if frames == 0:
        raise ClipFormatError("empty clip")
    _check_dims(frames, height, width, channels)
    expected = frames * height * width * channels
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise ClipFormatError(
            f"truncated payload in {path}: expected {expected} bytes, got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(frames, height, width, channels)
    return VideoClip(data=data, fps=fps)


def _load_png_dir(path: Path) -> VideoClip:
    from PIL import Image

    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"missing manifest.json in {path}")
    manifest = json.loads(manifest_path.read_text())
    fps = float(manifest.get("fps", 8.0))
    frame_glob = manifest.get("frame_glob", "*.png")
    frame_paths = sorted(glob.glob(str(path / frame_glob)))
    if not frame_paths:
        raise ClipFormatError(f"no frames matching {frame_glob!r} in {path}")
    frames = []
    shape = None
    for fp in frame_paths:
        img = np.asarray(Image.open(fp))
        if img.ndim == 2:
            img = img[..., np.newaxis]
        if img.shape[-1] == 4:  # drop alpha
            img = img[..., :3]
        if shape is None:
            shape = img.shape
        elif img.shape != shape:
            raise ClipFormatError(
                f"inconsistent frame dimensions: {fp} is {img.shape}, expected {shape}"
            )
        frames.append(img.astype(np.uint8))
    return VideoClip(data=np.stack(frames), fps=fps)


def to_grayscale(clip: VideoClip) -> GrayClip:
    """Convert to Rec. 601 luma at full real precision.

    Single-channel input passes through numerically unchanged.
    """
    if clip.channels == 1:
        return GrayClip(data=clip.data[..., 0].astype(np.float64), fps=clip.fps)
    r, g, b = LUMA_WEIGHTS
    luma = (r * clip.data[..., 0] + g * clip.data[..., 1] + b * clip.data[..., 2])
    return GrayClip(data=luma, fps=clip.fps)


def build_pyramid(image: np.ndarray, levels: int) -> ImagePyramid:
    """Build a box-filter pyramid from a 2-d luma image.

    Each level is produced by 2x2 box averaging followed by 2x decimation, so
    level k has dimensions floor(dim / 2**k). Construction stops early when the
    next level would drop below 8x8.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError("pyramid input must be a 2-d image")
    if image.shape[0] < MIN_EDGE or image.shape[1] < MIN_EDGE:
        raise ValueError(f"pyramid base smaller than {MIN_EDGE}x{MIN_EDGE}")
    out = [image]
    for _ in range(levels - 1):
        prev = out[-1]
        h2, w2 = prev.shape[0] // 2, prev.shape[1] // 2
        if h2 < MIN_EDGE or w2 < MIN_EDGE:
            break
        cropped = prev[: h2 * 2, : w2 * 2]
        out.append(cropped.reshape(h2, 2, w2, 2).mean(axis=(1, 3)))
    return ImagePyramid(levels=tuple(out))


def bilinear_sample(image: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample a 2-d image at subpixel (x, y) positions with edge clamping."""
    h, w = image.shape
    xs = np.clip(xs, 0.0, w - 1.0)
    ys = np.clip(ys, 0.0, h - 1.0)
    x0 = np.minimum(xs.astype(np.int64), w - 2)
    y0 = np.minimum(ys.astype(np.int64), h - 2)
    fx = xs - x0
    fy = ys - y0
    top = image[y0, x0] * (1.0 - fx) + image[y0, x0 + 1] * fx
    bot = image[y0 + 1, x0] * (1.0 - fx) + image[y0 + 1, x0 + 1] * fx
    return top * (1.0 - fy) + bot * fy
