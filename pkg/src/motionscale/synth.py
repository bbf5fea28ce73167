"""Synthetic clips with independently controllable object and camera motion.

Every clip is rendered from an explicit camera affine and explicit sprite
velocities, so ground-truth motion magnitudes come from the generating
parameters rather than pixel measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera_motion import eval_grid_points
from .pseudo_label import Calibration, calibrate
from .trainer import PairAnnotation
from .video_core import VideoClip, bilinear_sample


@dataclass(frozen=True)
class SpriteSpec:
    shape: str  # "rectangle" or "disk"
    size: float  # px (disk diameter / rectangle side)
    texture_seed: int
    velocity: tuple[float, float]  # (vx, vy) px/frame in the camera-compensated frame

    def __post_init__(self) -> None:
        if self.shape not in ("rectangle", "disk"):
            raise ValueError(f"unknown sprite shape {self.shape!r}")
        if self.size < 4:
            raise ValueError("sprite size must be >= 4 px")

    @property
    def speed(self) -> float:
        return math.hypot(*self.velocity)


@dataclass(frozen=True)
class CameraSpec:
    """Per-frame camera step: pan px/frame, zoom rate per frame, rotation rad/frame."""

    pan: tuple[float, float] = (0.0, 0.0)
    zoom_rate: float = 0.0
    rotation: float = 0.0


@dataclass(frozen=True)
class SynthSpec:
    frames: int
    height: int
    width: int
    background_seed: int
    sprites: tuple[SpriteSpec, ...] = ()
    camera: CameraSpec = field(default_factory=CameraSpec)
    seed: int = 0
    fps: float = 8.0
    # Toroidal sprite positions: a sprite exiting one side re-enters on the
    # other, so arbitrary velocity/pan combinations stay renderable over the
    # whole clip. Off by default; without it a sprite that leaves the frame
    # entirely is an error.
    sprite_wrap: bool = False

    def __post_init__(self) -> None:
        if self.frames < 2:
            raise ValueError("synthetic clips need at least 2 frames")
        limit = min(self.height, self.width) / 2
        for s in self.sprites:
            if s.size >= limit:
                raise ValueError(f"sprite size {s.size} too large for {self.height}x{self.width}")


@dataclass(frozen=True)
class GroundTruth:
    """Analytic per-clip motion magnitudes and their [1,10] intensities."""

    camera_disp_px: float
    object_disp_px: float
    intensity_object: float
    intensity_camera: float

    def __post_init__(self) -> None:
        if self.camera_disp_px < 0 or self.object_disp_px < 0:
            raise ValueError("displacements must be >= 0")
        for v in (self.intensity_object, self.intensity_camera):
            if not 1.0 <= v <= 10.0:
                raise ValueError("intensities must lie in [1, 10]")


def spec_to_dict(spec: SynthSpec) -> dict:
    """JSON-friendly form of a SynthSpec (clips are reproducible from it)."""
    return {
        "frames": spec.frames, "height": spec.height, "width": spec.width,
        "background_seed": spec.background_seed, "seed": spec.seed, "fps": spec.fps,
        "sprite_wrap": spec.sprite_wrap,
        "camera": {"pan": list(spec.camera.pan), "zoom_rate": spec.camera.zoom_rate,
                   "rotation": spec.camera.rotation},
        "sprites": [{"shape": s.shape, "size": s.size, "texture_seed": s.texture_seed,
                     "velocity": list(s.velocity)} for s in spec.sprites],
    }


def spec_from_dict(d: dict) -> SynthSpec:
    return SynthSpec(
        frames=d["frames"], height=d["height"], width=d["width"],
        background_seed=d["background_seed"], seed=d["seed"], fps=d["fps"],
        sprite_wrap=d.get("sprite_wrap", False),
        camera=CameraSpec(pan=tuple(d["camera"]["pan"]),
                          zoom_rate=d["camera"]["zoom_rate"],
                          rotation=d["camera"]["rotation"]),
        sprites=tuple(SpriteSpec(shape=s["shape"], size=s["size"],
                                 texture_seed=s["texture_seed"],
                                 velocity=tuple(s["velocity"]))
                      for s in d["sprites"]),
    )


def _step_affine(cam: CameraSpec, height: int, width: int) -> np.ndarray:
    """Homogeneous 3x3 per-frame camera step about the image center."""
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    s = 1.0 + cam.zoom_rate
    c, sn = math.cos(cam.rotation), math.sin(cam.rotation)
    a = np.array([[s * c, -s * sn], [s * sn, s * c]])
    t = np.array([cx, cy]) - a @ np.array([cx, cy]) + np.array(cam.pan)
    m = np.eye(3)
    m[:2, :2] = a
    m[:2, 2] = t
    return m


def affine_grid_displacement(matrix: np.ndarray, height: int, width: int) -> float:
    """Mean |A p - p| over the evaluation grid for a homogeneous 3x3 affine."""
    pts = eval_grid_points(height, width)
    moved = pts @ matrix[:2, :2].T + matrix[:2, 2]
    return float(np.mean(np.linalg.norm(moved - pts, axis=1)))


def _value_noise(rng: np.random.Generator, height: int, width: int, cell: float,
                 amplitude: float) -> np.ndarray:
    """Band-limited noise: bilinear upsampling of a coarse random lattice."""
    gh = int(math.ceil(height / cell)) + 2
    gw = int(math.ceil(width / cell)) + 2
    lattice = rng.uniform(-amplitude, amplitude, size=(gh, gw))
    ys = np.arange(height) / cell
    xs = np.arange(width) / cell
    gx, gy = np.meshgrid(xs, ys)
    return bilinear_sample(lattice, gx, gy)


def _background_canvas(spec: SynthSpec, transforms: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Scene-coordinate background large enough to cover every frame's footprint.

    Returns (canvas, origin) where canvas[y, x] stores the luma at scene point
    origin + (x, y).
    """
    h, w = spec.height, spec.width
    corners = np.array([[0, 0], [w - 1, 0], [0, h - 1], [w - 1, h - 1]], dtype=np.float64)
    lo = np.array([0.0, 0.0])
    hi = np.array([w - 1.0, h - 1.0])
    for m in transforms:
        inv = np.linalg.inv(m)
        pts = corners @ inv[:2, :2].T + inv[:2, 2]
        lo = np.minimum(lo, pts.min(axis=0))
        hi = np.maximum(hi, pts.max(axis=0))
    origin = np.floor(lo) - 2
    size = np.ceil(hi) + 3 - origin
    ch, cw = int(size[1]), int(size[0])
    rng = np.random.default_rng(np.random.SeedSequence([spec.background_seed, 0xB6]))
    canvas = 128.0 + _value_noise(rng, ch, cw, cell=11.0, amplitude=78.0)
    canvas += _value_noise(rng, ch, cw, cell=3.0, amplitude=26.0)
    return np.clip(canvas, 0.0, 255.0), origin


def _sprite_texture(sprite: SpriteSpec) -> np.ndarray:
    # Finer and higher-contrast than the background: foreground objects are
    # meant to be appearance-distinct, and the trackers need gradients.
    side = int(math.ceil(sprite.size)) + 4
    rng = np.random.default_rng(np.random.SeedSequence([sprite.texture_seed, 0x59]))
    tex = 128.0 + _value_noise(rng, side, side, cell=2.2, amplitude=120.0)
    return np.clip(tex, 0.0, 255.0)


def _sprite_coverage(sprite: SpriteSpec, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Antialiased coverage in [0,1] at offsets (dx, dy) from the sprite center."""
    half = sprite.size / 2.0
    if sprite.shape == "disk":
        return np.clip(half + 0.5 - np.hypot(dx, dy), 0.0, 1.0)
    cov_x = np.clip(half + 0.5 - np.abs(dx), 0.0, 1.0)
    cov_y = np.clip(half + 0.5 - np.abs(dy), 0.0, 1.0)
    return cov_x * cov_y


def _initial_positions(spec: SynthSpec, transforms: list[np.ndarray],
                       rng: np.random.Generator) -> list[np.ndarray]:
    """Scene-coordinate start positions keeping each sprite visible when possible.

    A sprite's on-frame position at frame k is C_k(start + v k), which is linear
    in the start, so candidates are scored by their worst-frame margin to the
    frame border. When no fully visible start exists (fast motion), the best
    candidate is used and partial exits are allowed; rendering errors only if a
    sprite leaves the frame entirely.
    """
    positions = []
    for s in spec.sprites:
        half = s.size / 2.0
        lo_x, hi_x = half + 1.0, spec.width - half - 2.0
        lo_y, hi_y = half + 1.0, spec.height - half - 2.0
        if spec.sprite_wrap:
            # Toroidal positions: anywhere works.
            positions.append(np.array([rng.uniform(0.0, spec.width),
                                       rng.uniform(0.0, spec.height)]))
            continue
        drift = np.stack([m[:2, :2] @ (np.array(s.velocity) * k) + m[:2, 2]
                          for k, m in enumerate(transforms)])
        linear = np.stack([m[:2, :2] for m in transforms])
        best, best_score = None, -np.inf
        for _ in range(60):
            cand = np.array([rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)])
            path = linear @ cand + drift
            score = min(
                path[:, 0].min() - lo_x, hi_x - path[:, 0].max(),
                path[:, 1].min() - lo_y, hi_y - path[:, 1].max(),
            )
            if score >= 0.0:
                best = cand
                break
            if score > best_score:
                best, best_score = cand, score
        positions.append(best)
    return positions


def _camera_transforms(spec: SynthSpec) -> list[np.ndarray]:
    step = _step_affine(spec.camera, spec.height, spec.width)
    transforms = [np.eye(3)]
    for _ in range(spec.frames - 1):
        transforms.append(step @ transforms[-1])
    return transforms


def _render(spec: SynthSpec, with_masks: bool) -> tuple[VideoClip, np.ndarray | None]:
    transforms = _camera_transforms(spec)
    canvas, origin = _background_canvas(spec, transforms)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0xC11D]))
    starts = _initial_positions(spec, transforms, rng)
    textures = [_sprite_texture(s) for s in spec.sprites]

    h, w = spec.height, spec.width
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float64), np.arange(h, dtype=np.float64))
    frames = np.empty((spec.frames, h, w), dtype=np.uint8)
    masks = np.zeros((spec.frames, h, w), dtype=bool) if with_masks else None

    def draw_at(frame, mask_frame, s, tex, center):
        """Composite one sprite copy; returns False when fully outside."""
        half = s.size / 2.0
        x0 = int(math.floor(center[0] - half - 1))
        y0 = int(math.floor(center[1] - half - 1))
        x1 = int(math.ceil(center[0] + half + 2))
        y1 = int(math.ceil(center[1] + half + 2))
        if x1 <= 0 or y1 <= 0 or x0 >= w or y0 >= h:
            return False
        x0c, y0c = max(x0, 0), max(y0, 0)
        x1c, y1c = min(x1, w), min(y1, h)
        dx = gx[y0c:y1c, x0c:x1c] - center[0]
        dy = gy[y0c:y1c, x0c:x1c] - center[1]
        cov = _sprite_coverage(s, dx, dy)
        tex_half = tex.shape[0] / 2.0
        vals = bilinear_sample(tex, dx + tex_half, dy + tex_half)
        region = frame[y0c:y1c, x0c:x1c]
        frame[y0c:y1c, x0c:x1c] = region * (1.0 - cov) + vals * cov
        if mask_frame is not None and s.speed > 0.0:
            mask_frame[y0c:y1c, x0c:x1c] |= cov > 0.5
        return True

    for k, m in enumerate(transforms):
        inv = np.linalg.inv(m)
        sx = inv[0, 0] * gx + inv[0, 1] * gy + inv[0, 2] - origin[0]
        sy = inv[1, 0] * gx + inv[1, 1] * gy + inv[1, 2] - origin[1]
        frame = bilinear_sample(canvas, sx, sy)
        mask_frame = masks[k] if masks is not None else None
        for s, start, tex in zip(spec.sprites, starts, textures):
            scene_pos = start + np.array(s.velocity) * k
            center = m[:2, :2] @ scene_pos + m[:2, 2]
            if spec.sprite_wrap:
                base = np.array([center[0] % w, center[1] % h])
                for ox in (-w, 0.0, w):
                    for oy in (-h, 0.0, h):
                        draw_at(frame, mask_frame, s, tex, base + [ox, oy])
            elif not draw_at(frame, mask_frame, s, tex, center):
                raise ValueError(
                    f"sprite left the frame entirely at frame {k} (center {center})"
                )
        frames[k] = np.clip(np.rint(frame), 0, 255).astype(np.uint8)

    clip = VideoClip(data=frames[..., np.newaxis], fps=spec.fps)
    return clip, masks


def ground_truth(spec: SynthSpec, cal: Calibration | None = None) -> GroundTruth:
    """Analytic ground truth from the generating parameters."""
    cal = cal or Calibration()
    step = _step_affine(spec.camera, spec.height, spec.width)
    cam_disp = affine_grid_displacement(step, spec.height, spec.width)
    obj_disp = float(np.mean([s.speed for s in spec.sprites])) if spec.sprites else 0.0
    diag = math.hypot(spec.height, spec.width)
    return GroundTruth(
        camera_disp_px=cam_disp,
        object_disp_px=obj_disp,
        intensity_object=calibrate(obj_disp, diag, cal),
        intensity_camera=calibrate(cam_disp, diag, cal),
    )


def generate_clip(spec: SynthSpec, cal: Calibration | None = None) -> tuple[VideoClip, GroundTruth]:
    """Render a clip and compute its analytic ground truth. Deterministic per seed."""
    clip, _ = _render(spec, with_masks=False)
    return clip, ground_truth(spec, cal)


def generate_masks(spec: SynthSpec) -> np.ndarray:
    """Boolean (frames, height, width) foreground maps covering moving sprites."""
    _, masks = _render(spec, with_masks=True)
    return masks


# ---------------------------------------------------------------------------
# Pair dataset generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairDatasetConfig:
    n_pairs: int = 100
    frames: int = 16
    height: int = 64
    width: int = 96
    fps: float = 8.0
    object_range: tuple[float, float] = (1.0, 9.0)
    camera_range: tuple[float, float] = (1.0, 10.0)
    significance_gap: float = 2.0  # intensity gap labeled +/-2 instead of +/-1
    tie_band: float = 0.25  # |gap| below this labels 0
    min_gap: float = 0.5  # smallest non-tie gap the sampler produces
    tie_fraction: float = 0.1
    stress_fraction: float = 0.0  # fraction of pairs with opposing orderings
    # Foreground must occupy a visible fraction of the frame for a globally
    # pooled estimator to stand a chance; sizes stay under min(h, w) / 2 and
    # small enough that the camera fit keeps a solid background majority.
    sprite_size_range: tuple[float, float] = (16.0, 22.0)
    sprite_count_range: tuple[int, int] = (2, 2)
    # When set, every moving sprite is sized so its pixel area matches this
    # value: globally pooled features scale with foreground area, so keeping
    # the area fixed makes pooled motion statistics comparable across clips.
    fixed_sprite_area: float | None = 720.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ValueError("n_pairs must be >= 1")
        if not 0.0 <= self.stress_fraction <= 1.0:
            raise ValueError("stress_fraction must lie in [0, 1]")
        if self.min_gap <= self.tie_band:
            raise ValueError("min_gap must exceed tie_band")


@dataclass(frozen=True)
class PairSample:
    pair_id: str
    spec_a: SynthSpec
    spec_b: SynthSpec
    clip_a: VideoClip
    clip_b: VideoClip
    annotation: PairAnnotation
    truth_a: GroundTruth
    truth_b: GroundTruth


def relative_label(value_a: float, value_b: float, significance_gap: float,
                   tie_band: float) -> int:
    """Map a ground-truth intensity difference to a {-2,-1,0,+1,+2} label."""
    delta = value_a - value_b
    if abs(delta) < tie_band:
        return 0
    magnitude = 2 if abs(delta) >= significance_gap else 1
    return magnitude if delta > 0 else -magnitude


def intensity_to_raw(intensity: float, diag_px: float, cal: Calibration | None = None) -> float:
    """Invert the linear calibration: intensity in [1,10] to px/frame displacement."""
    cal = cal or Calibration()
    frac = (intensity - 1.0) / 9.0
    return (cal.d_min + frac * (cal.d_max - cal.d_min)) * diag_px


def _sample_intensity_pair(rng: np.random.Generator, lo: float, hi: float,
                           cfg: PairDatasetConfig, forced_sign: int | None) -> tuple[float, float]:
    """Draw (a, b) intensities; forced_sign fixes sign(a - b) for stress pairs."""
    if hi - lo <= cfg.min_gap or (forced_sign is None and rng.random() < cfg.tie_fraction):
        base = rng.uniform(lo, hi) if hi > lo else lo
        jitter = rng.uniform(-cfg.tie_band, cfg.tie_band) * 0.45
        return base, float(np.clip(base + jitter, lo, hi))
    gap = rng.uniform(cfg.min_gap, hi - lo)
    low = rng.uniform(lo, hi - gap)
    sign = forced_sign if forced_sign is not None else (1 if rng.random() < 0.5 else -1)
    return (low + gap, low) if sign > 0 else (low, low + gap)


def _camera_for_intensity(intensity: float, object_intensity: float,
                          cfg: PairDatasetConfig, rng: np.random.Generator,
                          cal: Calibration) -> CameraSpec:
    """Camera step whose grid displacement equals the target raw displacement.

    Pans are exact at any magnitude. Zoom and rotation compound over the clip,
    so they are used only when both the camera and object raw displacements are
    small enough that sprites can stay inside the frame.
    """
    diag = math.hypot(cfg.height, cfg.width)
    raw = intensity_to_raw(intensity, diag)
    raw_obj = intensity_to_raw(object_intensity, diag)
    if raw <= 1e-9:
        return CameraSpec()
    draw = rng.random()
    kind = "pan"
    if raw <= 2.0 and raw_obj <= 1.5 and draw >= 0.6:
        kind = "zoom" if draw < 0.8 else "rotate"
    if kind == "pan":
        # Horizontally biased: the frame is wider than tall, and large vertical
        # pans would push sprites out of the 64-px-high frame.
        angle = rng.uniform(-0.45, 0.45) + (0.0 if rng.random() < 0.5 else math.pi)
        return CameraSpec(pan=(raw * math.cos(angle), raw * math.sin(angle)))
    grid = eval_grid_points(cfg.height, cfg.width)
    center = np.array([(cfg.width - 1) / 2.0, (cfg.height - 1) / 2.0])
    mean_radius = float(np.mean(np.linalg.norm(grid - center, axis=1)))
    if kind == "zoom":
        rate = raw / mean_radius * (1 if rng.random() < 0.5 else -1)
        return CameraSpec(zoom_rate=rate)
    theta = 2.0 * math.asin(min(1.0, raw / (2.0 * mean_radius)))
    return CameraSpec(rotation=theta * (1 if rng.random() < 0.5 else -1))


def _sprites_for_intensity(intensity: float, camera: CameraSpec, cfg: PairDatasetConfig,
                           rng: np.random.Generator) -> tuple[SpriteSpec, ...]:
    """Sprites whose mean scene-frame speed realizes the target object intensity.

    Sprite motion is biased perpendicular to the camera pan: on-frame speeds
    then compose as sqrt(cam^2 + obj^2), so object motion adds apparent motion
    on top of the camera instead of cancelling against it. Positions wrap, so
    any direction/magnitude stays renderable. The ground-truth object magnitude
    is the scene-frame speed and is direction-invariant.
    """
    diag = math.hypot(cfg.height, cfg.width)
    raw = intensity_to_raw(intensity, diag)
    lo_n, hi_n = cfg.sprite_count_range
    if raw <= 1e-9:
        # Intensity 1: either an empty scene or static distractor sprites.
        n = int(rng.integers(0, hi_n + 1))
        velocity = (0.0, 0.0)
    else:
        n = int(rng.integers(lo_n, hi_n + 1))
        velocity = None
    pan_mag = math.hypot(*camera.pan)
    # Scale the configured sizes down for small frames (sizes must stay under
    # min(h, w) / 2).
    lo_s, hi_s = cfg.sprite_size_range
    limit = min(cfg.height, cfg.width) / 2.0 - 1.0
    if hi_s > limit:
        lo_s, hi_s = lo_s * limit / hi_s, limit
    sprites = []
    for _ in range(n):
        shape = "disk" if rng.random() < 0.5 else "rectangle"
        if cfg.fixed_sprite_area is not None and velocity is None:
            area = cfg.fixed_sprite_area
            size = math.sqrt(area) if shape == "rectangle" else math.sqrt(4.0 * area / math.pi)
            size = float(min(size, limit))
        else:
            size = float(rng.uniform(lo_s, hi_s))
        if velocity is None:
            if pan_mag > 1e-9:
                base = math.atan2(camera.pan[1], camera.pan[0]) + math.pi / 2.0
            else:
                base = rng.uniform(0.0, 2.0 * math.pi)
            angle = base + rng.uniform(-0.35, 0.35)
            if rng.random() < 0.5:
                angle += math.pi
            v = (raw * math.cos(angle), raw * math.sin(angle))
        else:
            v = velocity
        sprites.append(SpriteSpec(shape=shape, size=size,
                                  texture_seed=int(rng.integers(0, 2**31)), velocity=v))
    return tuple(sprites)


def _spec_for_intensities(obj_int: float, cam_int: float, cfg: PairDatasetConfig,
                          rng: np.random.Generator, cal: Calibration) -> SynthSpec:
    camera = _camera_for_intensity(cam_int, obj_int, cfg, rng, cal)
    return SynthSpec(
        sprite_wrap=True,
        frames=cfg.frames,
        height=cfg.height,
        width=cfg.width,
        background_seed=int(rng.integers(0, 2**31)),
        sprites=_sprites_for_intensity(obj_int, camera, cfg, rng),
        camera=camera,
        seed=int(rng.integers(0, 2**31)),
        fps=cfg.fps,
    )


def generate_pair_dataset(cfg: PairDatasetConfig) -> list[PairSample]:
    """Generate annotated video pairs following the relative-labeling protocol.

    Labels come from analytic ground truth: sign of the intensity difference,
    magnitude 2 when the gap reaches ``significance_gap``, 0 inside the tie
    band. Object comparisons are implicitly gated by the moving-object flags
    because a clip without moving sprites has object intensity exactly 1.
    """
    cal = Calibration()
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0xDA7A]))
    n_stress = int(round(cfg.stress_fraction * cfg.n_pairs))
    samples = []
    for i in range(cfg.n_pairs):
        stress = i < n_stress
        if stress:
            sign = 1 if rng.random() < 0.5 else -1
            obj_a, obj_b = _sample_intensity_pair(rng, *cfg.object_range, cfg, forced_sign=sign)
            cam_a, cam_b = _sample_intensity_pair(rng, *cfg.camera_range, cfg, forced_sign=-sign)
        else:
            obj_a, obj_b = _sample_intensity_pair(rng, *cfg.object_range, cfg, forced_sign=None)
            cam_a, cam_b = _sample_intensity_pair(rng, *cfg.camera_range, cfg, forced_sign=None)
        spec_a = _spec_for_intensities(obj_a, cam_a, cfg, rng, cal)
        spec_b = _spec_for_intensities(obj_b, cam_b, cfg, rng, cal)
        clip_a, truth_a = generate_clip(spec_a, cal)
        clip_b, truth_b = generate_clip(spec_b, cal)
        pair_id = f"pair-{i:05d}"
        annotation = PairAnnotation(
            pair_id=pair_id,
            clip_a=f"{pair_id}_a.vclip",
            clip_b=f"{pair_id}_b.vclip",
            object_a_moving=int(any(s.speed > 0 for s in spec_a.sprites)),
            object_b_moving=int(any(s.speed > 0 for s in spec_b.sprites)),
            object_rel=relative_label(truth_a.intensity_object, truth_b.intensity_object,
                                      cfg.significance_gap, cfg.tie_band),
            camera_rel=relative_label(truth_a.intensity_camera, truth_b.intensity_camera,
                                      cfg.significance_gap, cfg.tie_band),
            annotator_id="synth-oracle",
            timestamp=0.0,
        )
        samples.append(PairSample(
            pair_id=pair_id, spec_a=spec_a, spec_b=spec_b,
            clip_a=clip_a, clip_b=clip_b, annotation=annotation,
            truth_a=truth_a, truth_b=truth_b,
        ))
    return samples
