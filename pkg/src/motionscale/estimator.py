"""Learnable motion estimator: temporally-adaptive conv backbone and dual heads.

The backbone is two 3x3x3 convolution blocks (spatial stride 2) whose linear
responses are rescaled per frame and output channel by a small descriptor
network ("TAda-lite": a shared base kernel modulated by per-frame calibration
factors). Global average pooling feeds two disjoint MLP heads that produce the
object and camera scores. Forward and backward passes are exact, 64-bit, and
implemented with im2col matmuls so finite-difference checks run in seconds.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .video_core import VideoClip, to_grayscale

CHECKPOINT_MAGIC = b"MSTN"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class EstimatorConfig:
    frames: int = 16
    height: int = 64
    width: int = 96
    channels: tuple[int, ...] = (1, 8, 16)  # input channels then per-block outputs
    calib_hidden: int = 8
    head_hidden: int = 16
    score_midpoint: float = 5.5  # head bias at init: midpoint of the 1-10 scale

    def __post_init__(self) -> None:
        if self.frames < 4:
            raise ValueError("estimator needs at least 4 frames")
        if self.height < 16 or self.width < 16:
            raise ValueError("estimator needs frames of at least 16x16")
        if len(self.channels) < 2:
            raise ValueError("need at least one conv block")
        if self.channels[0] not in (1, 3):
            raise ValueError("input channels must be 1 or 3")

    @property
    def n_blocks(self) -> int:
        return len(self.channels) - 1

    def spatial_dims(self) -> list[tuple[int, int]]:
        """Spatial size after each block (kernel 3, stride 2, padding 1)."""
        dims = [(self.height, self.width)]
        for _ in range(self.n_blocks):
            h, w = dims[-1]
            dims.append(((h - 1) // 2 + 1, (w - 1) // 2 + 1))
        return dims

    def to_dict(self) -> dict:
        return {
            "frames": self.frames, "height": self.height, "width": self.width,
            "channels": list(self.channels), "calib_hidden": self.calib_hidden,
            "head_hidden": self.head_hidden, "score_midpoint": self.score_midpoint,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimatorConfig":
        return cls(frames=d["frames"], height=d["height"], width=d["width"],
                   channels=tuple(d["channels"]), calib_hidden=d["calib_hidden"],
                   head_hidden=d["head_hidden"], score_midpoint=d["score_midpoint"])


@dataclass(frozen=True)
class MotionScores:
    """(object, camera) scores; unbounded during training, clamp only to report."""

    object: float
    camera: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.object) and np.isfinite(self.camera)):
            raise ValueError("scores must be finite")

    def clamped(self) -> "MotionScores":
        return MotionScores(object=float(np.clip(self.object, 1.0, 10.0)),
                            camera=float(np.clip(self.camera, 1.0, 10.0)))


def _param_spec(cfg: EstimatorConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Stable (name, shape) index map covering every parameter exactly once."""
    spec: list[tuple[str, tuple[int, ...]]] = []
    for k in range(cfg.n_blocks):
        c_in, c_out = cfg.channels[k], cfg.channels[k + 1]
        spec.append((f"block{k}.conv_w", (c_out, c_in, 3, 3, 3)))
        spec.append((f"block{k}.conv_b", (c_out,)))
        spec.append((f"block{k}.calib_w1", (cfg.calib_hidden, c_in)))
        spec.append((f"block{k}.calib_b1", (cfg.calib_hidden,)))
        spec.append((f"block{k}.calib_w2", (c_out, cfg.calib_hidden)))
        spec.append((f"block{k}.calib_b2", (c_out,)))
    c_last = cfg.channels[-1]
    for head in ("object", "camera"):
        spec.append((f"head_{head}.w1", (cfg.head_hidden, c_last)))
        spec.append((f"head_{head}.b1", (cfg.head_hidden,)))
        spec.append((f"head_{head}.w2", (cfg.head_hidden,)))
        spec.append((f"head_{head}.b2", ()))
    return spec


@dataclass(frozen=True)
class EstimatorParams:
    """All weights keyed by name, with a stable flattening order."""

    config: EstimatorConfig
    tensors: dict[str, np.ndarray]

    def __post_init__(self) -> None:
        spec = _param_spec(self.config)
        names = [n for n, _ in spec]
        if list(self.tensors.keys()) != names:
            raise ValueError("parameter tensors do not match the config's index map")
        for name, shape in spec:
            t = self.tensors[name]
            if t.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {t.shape}")
            if not np.all(np.isfinite(t)):
                raise ValueError(f"{name}: non-finite values")

    @property
    def count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.tensors[n].ravel() for n, _ in _param_spec(self.config)])

    def with_flat(self, flat: np.ndarray) -> "EstimatorParams":
        tensors = {}
        off = 0
        for name, shape in _param_spec(self.config):
            size = int(np.prod(shape)) if shape else 1
            tensors[name] = flat[off:off + size].reshape(shape).copy()
            off += size
        if off != flat.size:
            raise ValueError(f"flat vector has {flat.size} entries, expected {off}")
        return EstimatorParams(config=self.config, tensors=tensors)

    def grad_slices(self) -> dict[str, slice]:
        """Flat-vector slice per parameter tensor, in index-map order."""
        out = {}
        off = 0
        for name, shape in _param_spec(self.config):
            size = int(np.prod(shape)) if shape else 1
            out[name] = slice(off, off + size)
            off += size
        return out


def init_params(cfg: EstimatorConfig, seed: int) -> EstimatorParams:
    """He-uniform weights; calibration output layer zero so factors start at 1;
    head output biases at the scale midpoint."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x1417]))

    def he_uniform(shape: tuple[int, ...], fan_in: int) -> np.ndarray:
        limit = np.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    tensors: dict[str, np.ndarray] = {}
    for k in range(cfg.n_blocks):
        c_in, c_out = cfg.channels[k], cfg.channels[k + 1]
        tensors[f"block{k}.conv_w"] = he_uniform((c_out, c_in, 3, 3, 3), c_in * 27)
        tensors[f"block{k}.conv_b"] = np.zeros(c_out)
        tensors[f"block{k}.calib_w1"] = he_uniform((cfg.calib_hidden, c_in), c_in)
        tensors[f"block{k}.calib_b1"] = np.zeros(cfg.calib_hidden)
        tensors[f"block{k}.calib_w2"] = np.zeros((c_out, cfg.calib_hidden))
        tensors[f"block{k}.calib_b2"] = np.zeros(c_out)
    c_last = cfg.channels[-1]
    for head in ("object", "camera"):
        tensors[f"head_{head}.w1"] = he_uniform((cfg.head_hidden, c_last), c_last)
        tensors[f"head_{head}.b1"] = np.zeros(cfg.head_hidden)
        tensors[f"head_{head}.w2"] = he_uniform((cfg.head_hidden,), cfg.head_hidden)
        tensors[f"head_{head}.b2"] = np.array(cfg.score_midpoint)
    return EstimatorParams(config=cfg, tensors=tensors)


@dataclass
class _BlockCache:
    x: np.ndarray  # block input (C_in, T, H, W)
    col: np.ndarray  # im2col matrix (C_in*27, T*H'*W')
    z: np.ndarray  # conv response before calibration (C_out, T, H', W')
    d: np.ndarray  # per-frame descriptors (T, C_in)
    u_pre: np.ndarray  # calibration hidden pre-activation (T, hidden)
    u: np.ndarray  # calibration hidden (T, hidden)
    f: np.ndarray  # calibration factors (T, C_out)
    y: np.ndarray  # pre-ReLU block output (C_out, T, H', W')
    r: np.ndarray  # block output (C_out, T, H', W')


@dataclass
class _HeadCache:
    g: np.ndarray
    h_pre: np.ndarray
    h: np.ndarray


@dataclass
class ActivationCache:
    """Every intermediate needed by the backward pass."""

    config: EstimatorConfig
    blocks: list[_BlockCache] = field(default_factory=list)
    pooled: np.ndarray | None = None
    heads: dict[str, _HeadCache] = field(default_factory=dict)


def _im2col(x: np.ndarray) -> tuple[np.ndarray, tuple[int, int]]:
    """Column matrix for a 3x3x3 convolution, stride (1, 2, 2), padding 1."""
    c, t, h, w = x.shape
    p = np.zeros((c, t + 2, h + 2, w + 2))  # cheaper than np.pad
    p[:, 1:-1, 1:-1, 1:-1] = x
    windows = np.lib.stride_tricks.sliding_window_view(p, (3, 3, 3), axis=(1, 2, 3))
    windows = windows[:, :, ::2, ::2]  # spatial stride 2
    _, _, h_out, w_out, _, _, _ = windows.shape
    col = windows.transpose(0, 4, 5, 6, 1, 2, 3).reshape(c * 27, t * h_out * w_out)
    return np.ascontiguousarray(col), (h_out, w_out)


def tada_block_forward(x: np.ndarray, conv_w: np.ndarray, conv_b: np.ndarray,
                       factors: np.ndarray) -> np.ndarray:
    """One calibrated conv block with explicit per-frame factors (pre-ReLU).

    The factor scales the conv linear response (equivalent to scaling the
    kernel for that frame); the bias is added afterwards, so doubling the
    kernel while halving a frame's factors leaves that frame's output
    unchanged.
    """
    c_out = conv_w.shape[0]
    t = x.shape[1]
    col, (h_out, w_out) = _im2col(x)
    z = (conv_w.reshape(c_out, -1) @ col).reshape(c_out, t, h_out, w_out)
    return factors.T[:, :, None, None] * z + conv_b[:, None, None, None]


def _block_forward(x: np.ndarray, p: EstimatorParams, k: int) -> _BlockCache:
    t = p.config.frames
    conv_w = p.tensors[f"block{k}.conv_w"]
    conv_b = p.tensors[f"block{k}.conv_b"]
    w1 = p.tensors[f"block{k}.calib_w1"]
    b1 = p.tensors[f"block{k}.calib_b1"]
    w2 = p.tensors[f"block{k}.calib_w2"]
    b2 = p.tensors[f"block{k}.calib_b2"]
    c_out = conv_w.shape[0]

    col, (h_out, w_out) = _im2col(x)
    z = (conv_w.reshape(c_out, -1) @ col).reshape(c_out, t, h_out, w_out)

    d = x.mean(axis=(2, 3)).T  # (T, C_in)
    u_pre = d @ w1.T + b1
    u = np.maximum(u_pre, 0.0)
    f = 1.0 + u @ w2.T + b2  # (T, C_out)

    y = f.T[:, :, None, None] * z + conv_b[:, None, None, None]
    r = np.maximum(y, 0.0)
    return _BlockCache(x=x, col=col, z=z, d=d, u_pre=u_pre, u=u, f=f, y=y, r=r)


def _block_backward(cache: _BlockCache, p: EstimatorParams, k: int, dr: np.ndarray,
                    grads: dict[str, np.ndarray], need_dx: bool) -> np.ndarray | None:
    conv_w = p.tensors[f"block{k}.conv_w"]
    w1 = p.tensors[f"block{k}.calib_w1"]
    w2 = p.tensors[f"block{k}.calib_w2"]
    c_out, c_in = conv_w.shape[0], conv_w.shape[1]
    _, t, h_out, w_out = cache.z.shape

    dy = dr * (cache.y > 0.0)
    grads[f"block{k}.conv_b"] = dy.sum(axis=(1, 2, 3))
    dz = cache.f.T[:, :, None, None] * dy
    df = np.einsum("ctij,ctij->tc", dy, cache.z)

    grads[f"block{k}.calib_w2"] = df.T @ cache.u
    grads[f"block{k}.calib_b2"] = df.sum(axis=0)
    du = (df @ w2) * (cache.u_pre > 0.0)
    grads[f"block{k}.calib_w1"] = du.T @ cache.d
    grads[f"block{k}.calib_b1"] = du.sum(axis=0)
    dd = du @ w1  # (T, C_in)

    dz_mat = dz.reshape(c_out, -1)
    grads[f"block{k}.conv_w"] = (dz_mat @ cache.col.T).reshape(conv_w.shape)

    if not need_dx:
        return None
    h_in, w_in = cache.x.shape[2], cache.x.shape[3]
    # Transposed convolution via four spatial parity planes: kernel offset
    # (b, c) lands on padded rows 2i+b, so rows/cols split by parity give
    # contiguous accumulation slices instead of 27 stride-2 scatters.
    hp = (h_in + 2 + 1) // 2
    wp = (w_in + 2 + 1) // 2
    planes = np.zeros((2, 2, c_in, t + 2, hp + 1, wp + 1))
    kernel_grad = np.tensordot(conv_w, dz, axes=([0], [0]))  # (C_in,3,3,3,T,H',W')
    for a in range(3):
        for b in range(3):
            for c in range(3):
                planes[b & 1, c & 1, :, a:a + t,
                       b // 2:b // 2 + h_out, c // 2:c // 2 + w_out] \
                    += kernel_grad[:, a, b, c]
    dp = np.empty((c_in, t + 2, h_in + 2, w_in + 2))
    for pb in range(2):
        for pc in range(2):
            rows = (h_in + 2 - pb + 1) // 2
            cols = (w_in + 2 - pc + 1) // 2
            dp[:, :, pb::2, pc::2] = planes[pb, pc, :, :, :rows, :cols]
    dx = dp[:, 1:-1, 1:-1, 1:-1]
    dx += (dd.T / (h_in * w_in))[:, :, None, None]
    return dx


def _head_forward(g: np.ndarray, p: EstimatorParams, head: str) -> tuple[float, _HeadCache]:
    w1 = p.tensors[f"head_{head}.w1"]
    b1 = p.tensors[f"head_{head}.b1"]
    w2 = p.tensors[f"head_{head}.w2"]
    b2 = p.tensors[f"head_{head}.b2"]
    h_pre = w1 @ g + b1
    h = np.maximum(h_pre, 0.0)
    s = float(w2 @ h + b2)
    return s, _HeadCache(g=g, h_pre=h_pre, h=h)


def _head_backward(cache: _HeadCache, p: EstimatorParams, head: str, ds: float,
                   grads: dict[str, np.ndarray]) -> np.ndarray:
    w1 = p.tensors[f"head_{head}.w1"]
    w2 = p.tensors[f"head_{head}.w2"]
    grads[f"head_{head}.w2"] = ds * cache.h
    grads[f"head_{head}.b2"] = np.array(ds)
    dh = ds * w2
    dh_pre = dh * (cache.h_pre > 0.0)
    grads[f"head_{head}.w1"] = np.outer(dh_pre, cache.g)
    grads[f"head_{head}.b1"] = dh_pre
    return w1.T @ dh_pre


def clip_to_input(clip: VideoClip) -> np.ndarray:
    """Normalized grayscale input tensor (1, T, H, W) in [0, 1]."""
    gray = to_grayscale(clip)
    return (gray.data / 255.0)[np.newaxis]


def forward(params: EstimatorParams, x: np.ndarray) -> tuple[MotionScores, ActivationCache]:
    """Score one normalized clip tensor of shape (C, T, H, W) or (T, H, W)."""
    cfg = params.config
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 3:
        x = x[np.newaxis]
    expected = (cfg.channels[0], cfg.frames, cfg.height, cfg.width)
    if x.shape != expected:
        raise ValueError(f"input shape {x.shape} does not match config {expected}")

    cache = ActivationCache(config=cfg)
    cur = x
    for k in range(cfg.n_blocks):
        bc = _block_forward(cur, params, k)
        cache.blocks.append(bc)
        cur = bc.r
    g = cur.mean(axis=(1, 2, 3))
    cache.pooled = g
    s_obj, hc_obj = _head_forward(g, params, "object")
    s_cam, hc_cam = _head_forward(g, params, "camera")
    cache.heads = {"object": hc_obj, "camera": hc_cam}
    return MotionScores(object=s_obj, camera=s_cam), cache


def backward(params: EstimatorParams, cache: ActivationCache,
             upstream: tuple[float, float]) -> np.ndarray:
    """Exact gradient of upstream[0]*s_object + upstream[1]*s_camera, flattened."""
    cfg = params.config
    if cache.config != cfg or len(cache.blocks) != cfg.n_blocks:
        raise ValueError("activation cache does not match parameters")
    grads: dict[str, np.ndarray] = {}
    dg = _head_backward(cache.heads["object"], params, "object", upstream[0], grads)
    dg = dg + _head_backward(cache.heads["camera"], params, "camera", upstream[1], grads)

    last = cache.blocks[-1].r
    dr = np.broadcast_to((dg / (last.shape[1] * last.shape[2] * last.shape[3]))
                         [:, None, None, None], last.shape)
    for k in range(cfg.n_blocks - 1, -1, -1):
        dr = _block_backward(cache.blocks[k], params, k, dr, grads, need_dx=k > 0)

    flat = np.concatenate([np.asarray(grads[name]).ravel()
                           for name, _ in _param_spec(cfg)])
    return flat


def score_clip(params: EstimatorParams, clip: VideoClip, clamp: bool = False) -> MotionScores:
    """Convenience scorer for full clips; ``clamp`` applies [1, 10] for reporting."""
    scores, _ = forward(params, clip_to_input(clip))
    return scores.clamped() if clamp else scores


def save_params(params: EstimatorParams, path) -> None:
    """Checkpoint: magic, version, config echo, then f64 parameters little-endian."""
    cfg_json = json.dumps(params.config.to_dict(), sort_keys=True).encode()
    flat = params.flatten().astype("<f8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(cfg_json)))
        fh.write(cfg_json)
        fh.write(flat.tobytes())


def load_params(path) -> EstimatorParams:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"bad checkpoint magic {raw[:4]!r}")
    version, = struct.unpack_from("<I", raw, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    cfg_len, = struct.unpack_from("<I", raw, 8)
    cfg = EstimatorConfig.from_dict(json.loads(raw[12:12 + cfg_len].decode()))
    flat = np.frombuffer(raw[12 + cfg_len:], dtype="<f8")
    template = init_params(cfg, seed=0)
    if flat.size != template.count:
        raise ValueError(f"checkpoint has {flat.size} parameters, expected {template.count}")
    return template.with_flat(flat.astype(np.float64))
