"""Sparse feature detection and pyramidal point tracking.

Detection is Shi-Tomasi (minimum eigenvalue of the 3x3-window structure tensor)
with greedy non-maximum suppression; tracking is pyramidal Lucas-Kanade with a
forward-backward consistency check per frame pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .video_core import GrayClip, bilinear_sample, build_pyramid


@dataclass(frozen=True)
class TrackerConfig:
    max_features: int = 200
    window_radius: int = 3  # 7x7 window
    pyramid_levels: int = 3
    max_iterations: int = 30
    convergence_px: float = 0.01
    fb_threshold_px: float = 1.0
    nms_radius: float = 5.0
    border: int = 8
    redetect_fraction: float = 0.5  # re-detect when live tracks drop below this


@dataclass(frozen=True)
class FeaturePoint:
    x: float
    y: float
    response: float


@dataclass(frozen=True)
class Trajectory:
    """Per-frame subpixel positions with validity flags.

    ``valid`` is a contiguous run of True: False before the track's birth frame
    (for tracks added by re-detection) and False forever once the track is lost.
    Positions outside the valid run repeat the nearest valid position.
    """

    id: int
    positions: np.ndarray  # (frames, 2) float64, columns (x, y)
    valid: np.ndarray  # (frames,) bool

    def __post_init__(self) -> None:
        run = np.flatnonzero(self.valid)
        if run.size and not np.array_equal(run, np.arange(run[0], run[-1] + 1)):
            raise ValueError("valid flags must form one contiguous run")


def _min_eig_response(image: np.ndarray) -> np.ndarray:
    """Minimum eigenvalue of the 3x3-window structure tensor at every pixel."""
    ix = np.zeros_like(image)
    iy = np.zeros_like(image)
    ix[:, 1:-1] = (image[:, 2:] - image[:, :-2]) / 2.0
    iy[1:-1, :] = (image[2:, :] - image[:-2, :]) / 2.0

    def box3(a: np.ndarray) -> np.ndarray:
        p = np.pad(a, 1)
        col = p[:-2] + p[1:-1] + p[2:]
        return col[:, :-2] + col[:, 1:-1] + col[:, 2:]

    sxx = box3(ix * ix)
    syy = box3(iy * iy)
    sxy = box3(ix * iy)
    half_trace = (sxx + syy) / 2.0
    root = np.sqrt(((sxx - syy) / 2.0) ** 2 + sxy**2)
    return half_trace - root


def detect_features(frame: np.ndarray, max_n: int,
                    cfg: TrackerConfig = TrackerConfig()) -> list[FeaturePoint]:
    """Top ``max_n`` Shi-Tomasi corners after non-maximum suppression.

    The 8-px frame border is excluded. Suppression is greedy in descending
    response order (ties broken by row then column), removing candidates within
    ``nms_radius`` of an already kept corner, so results are deterministic.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] < 16 or frame.shape[1] < 16:
        raise ValueError("detection needs a frame of at least 16x16")
    response = _min_eig_response(frame)
    b = cfg.border
    interior = np.zeros_like(response, dtype=bool)
    interior[b:-b, b:-b] = True
    ys, xs = np.nonzero(interior & (response > 0.0))
    if ys.size == 0:
        return []
    resp = response[ys, xs]
    order = np.lexsort((xs, ys, -resp))
    # Greedy suppression on a raster: keeping a corner stamps a disc of radius
    # nms_radius, so the membership test per candidate is O(1).
    h, w = frame.shape
    r_int = int(np.floor(cfg.nms_radius))
    dy, dx = np.mgrid[-r_int:r_int + 1, -r_int:r_int + 1]
    disc = np.stack(np.nonzero(dy**2 + dx**2 <= cfg.nms_radius**2), axis=1) - r_int
    suppressed = np.zeros((h, w), dtype=bool)
    kept: list[FeaturePoint] = []
    for idx in order:
        x, y = int(xs[idx]), int(ys[idx])
        if suppressed[y, x]:
            continue
        kept.append(FeaturePoint(x=float(x), y=float(y), response=float(resp[idx])))
        if len(kept) >= max_n:
            break
        py = disc[:, 0] + y
        px = disc[:, 1] + x
        ok = (py >= 0) & (py < h) & (px >= 0) & (px < w)
        suppressed[py[ok], px[ok]] = True
    return kept


def _image_gradients(image: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.gradient(image, axis=1)
    gy = np.gradient(image, axis=0)
    return gx, gy


class _FramePyramid:
    """Pyramid of one frame plus cached gradients per level."""

    def __init__(self, image: np.ndarray, levels: int):
        self.levels = build_pyramid(image, levels).levels
        self.grads = [_image_gradients(lv) for lv in self.levels]


def _lk_pair(src: _FramePyramid, dst: _FramePyramid, pts: np.ndarray,
             cfg: TrackerConfig) -> tuple[np.ndarray, np.ndarray]:
    """Track points from ``src`` to ``dst``. Returns (new positions, ok flags)."""
    n = pts.shape[0]
    ok = np.ones(n, dtype=bool)
    if n == 0:
        return pts.copy(), ok
    r = cfg.window_radius
    offs = np.stack(np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1)),
                    axis=-1).reshape(-1, 2).astype(np.float64)  # (K, 2) as (x, y)
    d = np.zeros((n, 2))
    n_levels = len(src.levels)
    for level in range(n_levels - 1, -1, -1):
        img_i = src.levels[level]
        img_j = dst.levels[level]
        gx, gy = src.grads[level]
        p = pts / (2.0**level)
        wx = p[:, 0:1] + offs[:, 0]
        wy = p[:, 1:2] + offs[:, 1]
        i_win = bilinear_sample(img_i, wx, wy)
        ix = bilinear_sample(gx, wx, wy)
        iy = bilinear_sample(gy, wx, wy)
        a11 = np.sum(ix * ix, axis=1)
        a12 = np.sum(ix * iy, axis=1)
        a22 = np.sum(iy * iy, axis=1)
        det = a11 * a22 - a12 * a12
        solvable = det > 1e-9
        ok &= solvable
        active = ok.copy()
        for _ in range(cfg.max_iterations):
            if not active.any():
                break
            jx = wx[active] + d[active, 0:1]
            jy = wy[active] + d[active, 1:2]
            diff = i_win[active] - bilinear_sample(img_j, jx, jy)
            b1 = np.sum(diff * ix[active], axis=1)
            b2 = np.sum(diff * iy[active], axis=1)
            inv_det = 1.0 / det[active]
            ux = (a22[active] * b1 - a12[active] * b2) * inv_det
            uy = (a11[active] * b2 - a12[active] * b1) * inv_det
            d[active, 0] += ux
            d[active, 1] += uy
            still = np.hypot(ux, uy) >= cfg.convergence_px
            active[np.flatnonzero(active)] = still
        if level > 0:
            d *= 2.0
    return pts + d, ok


def _in_bounds(pts: np.ndarray, height: int, width: int) -> np.ndarray:
    """Points at least 1 px inside the frame border."""
    return ((pts[:, 0] >= 1.0) & (pts[:, 0] <= width - 2.0)
            & (pts[:, 1] >= 1.0) & (pts[:, 1] <= height - 2.0))


def track_points(clip: GrayClip, points: list[FeaturePoint],
                 cfg: TrackerConfig = TrackerConfig()) -> list[Trajectory]:
    """Track features through the clip with forward-backward validation.

    Tracks are invalidated when the backward re-track lands more than
    ``fb_threshold_px`` from the source point or the point reaches within 1 px
    of the border. New features are detected whenever the live-track count falls
    below ``redetect_fraction * max_features``; they join with their validity
    starting at the current frame.
    """
    if clip.frames < 2:
        raise ValueError("tracking needs at least 2 frames")
    h, w = clip.height, clip.width
    pyramids = [_FramePyramid(clip.data[i], cfg.pyramid_levels) for i in range(clip.frames)]

    positions = [np.array([[p.x, p.y] for p in points], dtype=np.float64).reshape(-1, 2)]
    valid = [np.ones(len(points), dtype=bool)]
    birth = [0] * len(points)

    for t in range(clip.frames - 1):
        cur = positions[t]
        cur_valid = valid[t]
        nxt = cur.copy()
        nxt_valid = cur_valid.copy()
        idx = np.flatnonzero(cur_valid)
        if idx.size:
            fwd, ok_f = _lk_pair(pyramids[t], pyramids[t + 1], cur[idx], cfg)
            back, ok_b = _lk_pair(pyramids[t + 1], pyramids[t], fwd, cfg)
            fb_err = np.linalg.norm(back - cur[idx], axis=1)
            good = (ok_f & ok_b & (fb_err <= cfg.fb_threshold_px)
                    & _in_bounds(fwd, h, w))
            nxt[idx] = np.where(good[:, np.newaxis], fwd, cur[idx])
            nxt_valid[idx] = good
        positions.append(nxt)
        valid.append(nxt_valid)

        live = int(np.count_nonzero(nxt_valid))
        if t + 1 < clip.frames - 1 and live < cfg.redetect_fraction * cfg.max_features:
            fresh = detect_features(clip.data[t + 1], cfg.max_features - live, cfg)
            existing = nxt[nxt_valid]
            r2 = cfg.nms_radius**2
            for fp in fresh:
                if existing.size:
                    dd = existing - np.array([fp.x, fp.y])
                    if np.min(np.sum(dd * dd, axis=1)) <= r2:
                        continue
                for s in range(len(positions)):
                    positions[s] = np.vstack([positions[s], [fp.x, fp.y]])
                    valid[s] = np.append(valid[s], s == t + 1)
                birth.append(t + 1)
                existing = np.vstack([existing, [fp.x, fp.y]]) if existing.size \
                    else np.array([[fp.x, fp.y]])

    pos_arr = np.stack(positions)  # (frames, n, 2)
    valid_arr = np.stack(valid)  # (frames, n)
    out = []
    for i in range(pos_arr.shape[1]):
        # Freeze pre-birth positions at the birth position.
        pos_i = pos_arr[:, i].copy()
        b = birth[i]
        pos_i[:b] = pos_i[b]
        out.append(Trajectory(id=i, positions=pos_i, valid=valid_arr[:, i]))
    return out


def trajectories_to_jsonl(trajectories: list[Trajectory]) -> str:
    """Serialize trajectories, one JSON object per line."""
    import json

    lines = []
    for tr in trajectories:
        lines.append(json.dumps({
            "id": tr.id,
            "positions": [[round(float(x), 4), round(float(y), 4)] for x, y in tr.positions],
            "valid": [bool(v) for v in tr.valid],
        }, separators=(",", ":")))
    return "\n".join(lines) + "\n"
