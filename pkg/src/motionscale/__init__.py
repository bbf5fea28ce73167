"""motionscale: decoupled object/camera motion intensity for short clips.

Pipeline modules:

- ``video_core``: clip containers, `.vclip` format, grayscale, pyramids
- ``synth``: ground-truth-controlled synthetic clips and annotated pair datasets
- ``tracking``: Shi-Tomasi detection + pyramidal Lucas-Kanade tracking
- ``camera_motion``: RANSAC global affine per frame pair
- ``pseudo_label``: camera/object decomposition onto the 1-10 scale
- ``ssim_baseline``: inter-frame-SSIM coupled baseline
- ``estimator``: TAda-lite backbone + dual heads with exact gradients
- ``trainer``: pairwise ranking + regression training with Adam
- ``evaluation``: ranking accuracy and motion strength error
- ``condition_embed``: decoupled condition embeddings, forward diffusion
- ``server`` / ``cli``: annotation HTTP service and command-line tools
"""

from .camera_motion import AffineMotion, CameraPath, fit_global_affine
from .condition_embed import NoiseSchedule, embed_scores, forward_diffuse, inject
from .estimator import EstimatorConfig, EstimatorParams, MotionScores, forward, init_params
from .evaluation import EvalReport, ScorerHandle, motion_strength_error, ranking_accuracy
from .pseudo_label import Calibration, MotionLabels, calibrate, compute_pseudo_labels
from .ssim_baseline import SsimConfig, ssim, ssim_motion_score
from .synth import GroundTruth, PairDatasetConfig, SynthSpec, generate_clip, generate_pair_dataset
from .tracking import FeaturePoint, Trajectory, detect_features, track_points
from .trainer import LossBreakdown, PairAnnotation, TrainConfig, train
from .video_core import GrayClip, VideoClip, load_clip, save_clip, to_grayscale

__version__ = "0.1.0"

__all__ = [
    "AffineMotion", "CameraPath", "Calibration", "EstimatorConfig",
    "EstimatorParams", "EvalReport", "FeaturePoint", "GrayClip", "GroundTruth",
    "LossBreakdown", "MotionLabels", "MotionScores", "NoiseSchedule",
    "PairAnnotation", "PairDatasetConfig", "ScorerHandle", "SsimConfig",
    "SynthSpec", "Trajectory", "TrainConfig", "VideoClip", "calibrate",
    "compute_pseudo_labels", "detect_features", "embed_scores",
    "fit_global_affine", "forward", "forward_diffuse", "generate_clip",
    "generate_pair_dataset", "init_params", "inject", "load_clip",
    "motion_strength_error", "ranking_accuracy", "save_clip", "ssim",
    "ssim_motion_score", "to_grayscale", "track_points", "train",
]
