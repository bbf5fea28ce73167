import numpy as np
import pytest

from motionscale.pseudo_label import Calibration
from motionscale.synth import (CameraSpec, PairDatasetConfig, SpriteSpec,
                               SynthSpec, generate_clip, generate_masks,
                               generate_pair_dataset, intensity_to_raw,
                               relative_label, spec_from_dict, spec_to_dict)


def base_spec(**kw):
    defaults = dict(frames=8, height=64, width=96, background_seed=1, seed=2)
    defaults.update(kw)
    return SynthSpec(**defaults)


class TestGenerateClip:
    def test_static_scene_identical_frames(self):
        spec = base_spec(sprites=(SpriteSpec("disk", 12, 5, (0.0, 0.0)),))
        clip, gt = generate_clip(spec)
        for t in range(1, clip.frames):
            assert np.array_equal(clip.data[t], clip.data[0])
        assert gt.camera_disp_px == 0.0
        assert gt.object_disp_px == 0.0
        assert gt.intensity_object == 1.0
        assert gt.intensity_camera == 1.0

    def test_pure_pan_displacement_exact(self):
        spec = base_spec(camera=CameraSpec(pan=(2.0, 0.0)))
        _, gt = generate_clip(spec)
        assert gt.camera_disp_px == pytest.approx(2.0, abs=1e-12)
        assert gt.object_disp_px == 0.0

    def test_single_sprite_velocity(self):
        spec = base_spec(sprites=(SpriteSpec("rectangle", 14, 5, (4.0, 0.0)),))
        _, gt = generate_clip(spec)
        assert gt.object_disp_px == pytest.approx(4.0)
        assert gt.camera_disp_px == 0.0

    def test_same_seed_byte_identical(self):
        spec = base_spec(sprites=(SpriteSpec("disk", 12, 5, (1.0, 0.5)),),
                         camera=CameraSpec(pan=(1.0, 0.0)))
        clip1, gt1 = generate_clip(spec)
        clip2, gt2 = generate_clip(spec)
        assert clip1.data.tobytes() == clip2.data.tobytes()
        assert gt1 == gt2

    def test_camera_truth_invariant_to_sprites(self):
        cam = CameraSpec(pan=(1.5, 0.5))
        _, gt_empty = generate_clip(base_spec(camera=cam))
        _, gt_sprites = generate_clip(base_spec(
            camera=cam, sprites=(SpriteSpec("disk", 12, 5, (2.0, 0.0)),)))
        assert gt_empty.camera_disp_px == gt_sprites.camera_disp_px

    def test_object_truth_invariant_to_camera(self):
        sprites = (SpriteSpec("disk", 12, 5, (-2.0, 0.0)),)
        _, gt_static = generate_clip(base_spec(sprites=sprites))
        _, gt_pan = generate_clip(base_spec(sprites=sprites,
                                            camera=CameraSpec(pan=(2.0, 0.0))))
        assert gt_static.object_disp_px == gt_pan.object_disp_px

    def test_sprite_leaving_frame_errors(self):
        spec = base_spec(frames=16, sprites=(SpriteSpec("disk", 12, 5, (12.0, 0.0)),))
        with pytest.raises(ValueError, match="left the frame entirely"):
            generate_clip(spec)

    def test_zoom_displacement_positive(self):
        spec = base_spec(camera=CameraSpec(zoom_rate=0.02))
        _, gt = generate_clip(spec)
        assert gt.camera_disp_px > 0.0

    def test_frames_minimum(self):
        with pytest.raises(ValueError):
            base_spec(frames=1)

    def test_oversized_sprite_rejected(self):
        with pytest.raises(ValueError, match="too large"):
            base_spec(sprites=(SpriteSpec("disk", 40, 5, (0.0, 0.0)),))


class TestMasks:
    def test_mask_covers_moving_sprite(self):
        spec = base_spec(sprites=(SpriteSpec("disk", 14, 5, (2.0, 0.0)),))
        masks = generate_masks(spec)
        assert masks.shape == (8, 64, 96)
        area = np.pi * 7.0**2
        for t in range(8):
            assert area * 0.5 < masks[t].sum() < area * 1.5

    def test_static_sprites_not_in_mask(self):
        spec = base_spec(sprites=(SpriteSpec("disk", 14, 5, (0.0, 0.0)),))
        masks = generate_masks(spec)
        assert masks.sum() == 0


class TestRelativeLabel:
    def test_significant_object_gap(self):
        # gt_a=(obj 8, cam 2), gt_b=(obj 3, cam 2)
        assert relative_label(8, 3, 2.0, 0.25) == 2
        assert relative_label(2, 2, 2.0, 0.25) == 0

    def test_equal_is_tie(self):
        assert relative_label(5, 5, 2.0, 0.25) == 0

    def test_stress_pair_labels(self):
        # gt_a=(obj 7, cam 2), gt_b=(obj 3, cam 8)
        assert relative_label(7, 3, 2.0, 0.25) == 2
        assert relative_label(2, 8, 2.0, 0.25) == -2

    def test_slight_gap(self):
        assert relative_label(5.0, 4.0, 2.0, 0.25) == 1
        assert relative_label(4.0, 5.0, 2.0, 0.25) == -1


class TestPairDataset:
    def test_labels_match_ground_truth(self):
        cfg = PairDatasetConfig(n_pairs=6, seed=3)
        for s in generate_pair_dataset(cfg):
            expected_obj = relative_label(s.truth_a.intensity_object,
                                          s.truth_b.intensity_object,
                                          cfg.significance_gap, cfg.tie_band)
            expected_cam = relative_label(s.truth_a.intensity_camera,
                                          s.truth_b.intensity_camera,
                                          cfg.significance_gap, cfg.tie_band)
            assert s.annotation.object_rel == expected_obj
            assert s.annotation.camera_rel == expected_cam

    def test_moving_flags(self):
        for s in generate_pair_dataset(PairDatasetConfig(n_pairs=6, seed=4)):
            moving_a = any(sp.speed > 0 for sp in s.spec_a.sprites)
            assert s.annotation.object_a_moving == int(moving_a)

    def test_stress_pairs_oppose(self):
        cfg = PairDatasetConfig(n_pairs=8, seed=5, stress_fraction=1.0)
        for s in generate_pair_dataset(cfg):
            assert s.annotation.object_rel != 0
            assert s.annotation.camera_rel != 0
            assert np.sign(s.annotation.object_rel) == -np.sign(s.annotation.camera_rel)

    def test_deterministic(self):
        cfg = PairDatasetConfig(n_pairs=3, seed=11)
        a = generate_pair_dataset(cfg)
        b = generate_pair_dataset(cfg)
        for s, t in zip(a, b):
            assert s.clip_a.data.tobytes() == t.clip_a.data.tobytes()
            assert s.annotation == t.annotation

    def test_intensity_to_raw_inverts_calibrate(self):
        from motionscale.pseudo_label import calibrate

        cal = Calibration()
        diag = float(np.hypot(64, 96))
        for intensity in (1.0, 3.3, 5.5, 10.0):
            raw = intensity_to_raw(intensity, diag, cal)
            assert calibrate(raw, diag, cal) == pytest.approx(intensity)


class TestSpecSerialization:
    def test_round_trip(self):
        spec = base_spec(sprites=(SpriteSpec("disk", 12, 5, (1.0, -0.5)),),
                         camera=CameraSpec(pan=(0.5, 0.2), zoom_rate=0.01))
        assert spec_from_dict(spec_to_dict(spec)) == spec
