import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from motionscale.video_core import (ClipFormatError, GrayClip, VideoClip,
                                    bilinear_sample, build_pyramid, load_clip,
                                    save_clip, to_grayscale)


def make_clip(frames=3, height=8, width=8, channels=3, seed=0, fps=8.0):
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 256, size=(frames, height, width, channels), dtype=np.uint8)
    return VideoClip(data=data, fps=fps)


class TestVclipFormat:
    def test_round_trip_identity(self, tmp_path):
        clip = make_clip(frames=5, height=10, width=12, channels=3, seed=1, fps=12.5)
        path = tmp_path / "clip.vclip"
        save_clip(clip, path)
        loaded = load_clip(path)
        assert np.array_equal(loaded.data, clip.data)
        assert loaded.fps == pytest.approx(clip.fps)

    def test_save_is_deterministic(self, tmp_path):
        clip = make_clip(seed=2)
        p1, p2 = tmp_path / "a.vclip", tmp_path / "b.vclip"
        save_clip(clip, p1)
        save_clip(clip, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_expected_data_length(self):
        clip = make_clip(frames=16, height=64, width=96, channels=3)
        assert clip.data.size == 294_912

    def test_empty_clip_header_rejected(self, tmp_path):
        clip = make_clip(frames=1)
        path = tmp_path / "c.vclip"
        save_clip(clip, path)
        raw = bytearray(path.read_bytes())
        raw[8:12] = (0).to_bytes(4, "little")  # frames field
        path.write_bytes(bytes(raw))
        with pytest.raises(ClipFormatError, match="empty clip"):
            load_clip(path)

    def test_too_small_clip_rejected_before_write(self, tmp_path):
        with pytest.raises(ClipFormatError, match="too small"):
            VideoClip(data=np.zeros((2, 4, 8, 1), dtype=np.uint8))
        assert list(tmp_path.iterdir()) == []

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_clip(tmp_path / "nope.vclip")

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.vclip"
        clip = make_clip()
        save_clip(clip, path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"NOPE"
        path.write_bytes(bytes(raw))
        with pytest.raises(ClipFormatError, match="bad magic"):
            load_clip(path)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "trunc.vclip"
        save_clip(make_clip(), path)
        raw = path.read_bytes()
        path.write_bytes(raw[:-10])
        with pytest.raises(ClipFormatError, match="truncated"):
            load_clip(path)

    @settings(max_examples=25, deadline=None)
    @given(frames=st.integers(1, 4), height=st.integers(8, 20),
           width=st.integers(8, 20), channels=st.sampled_from([1, 3]),
           seed=st.integers(0, 1000))
    def test_round_trip_property(self, tmp_path_factory, frames, height, width,
                                 channels, seed):
        clip = make_clip(frames, height, width, channels, seed)
        path = tmp_path_factory.mktemp("prop") / "c.vclip"
        save_clip(clip, path)
        assert np.array_equal(load_clip(path).data, clip.data)


class TestPngDirectory:
    def test_png_round_trip(self, tmp_path):
        from PIL import Image

        clip = make_clip(frames=3, height=12, width=10, channels=3, seed=9)
        d = tmp_path / "frames"
        d.mkdir()
        for i in range(clip.frames):
            Image.fromarray(clip.data[i]).save(d / f"frame_{i:03d}.png")
        (d / "manifest.json").write_text(json.dumps({"fps": 6.0, "frame_glob": "*.png"}))
        loaded = load_clip(d)
        assert np.array_equal(loaded.data, clip.data)
        assert loaded.fps == 6.0

    def test_inconsistent_frame_dims(self, tmp_path):
        from PIL import Image

        d = tmp_path / "frames"
        d.mkdir()
        Image.fromarray(np.zeros((12, 10, 3), dtype=np.uint8)).save(d / "a.png")
        Image.fromarray(np.zeros((12, 11, 3), dtype=np.uint8)).save(d / "b.png")
        (d / "manifest.json").write_text(json.dumps({"fps": 8.0, "frame_glob": "*.png"}))
        with pytest.raises(ClipFormatError, match="inconsistent"):
            load_clip(d)


class TestGrayscale:
    def test_pure_white(self):
        data = np.full((1, 8, 8, 3), 255, dtype=np.uint8)
        gray = to_grayscale(VideoClip(data=data))
        assert gray.data == pytest.approx(255.0)

    def test_pure_red(self):
        # 0.299 * 255 evaluated directly
        data = np.zeros((1, 8, 8, 3), dtype=np.uint8)
        data[..., 0] = 255
        gray = to_grayscale(VideoClip(data=data))
        assert np.allclose(gray.data, 76.245, atol=1e-12)

    def test_single_channel_passthrough(self):
        clip = make_clip(channels=1, seed=3)
        gray = to_grayscale(clip)
        assert np.array_equal(gray.data, clip.data[..., 0].astype(np.float64))

    def test_idempotent_on_gray(self):
        clip = make_clip(channels=1, seed=4)
        once = to_grayscale(clip)
        again = to_grayscale(VideoClip(data=np.rint(once.data).astype(np.uint8)
                                       [..., np.newaxis], fps=clip.fps))
        assert np.array_equal(np.rint(once.data), again.data)


class TestPyramid:
    def test_constant_preserved(self):
        pyr = build_pyramid(np.full((32, 32), 77.0), levels=3)
        for level in pyr.levels:
            assert np.allclose(level, 77.0)

    def test_level_sizes_64x96(self):
        pyr = build_pyramid(np.zeros((64, 96)), levels=4)
        assert [lv.shape for lv in pyr.levels] == [(64, 96), (32, 48), (16, 24), (8, 12)]

    def test_box_mean(self):
        img = np.zeros((16, 16))
        img[0, 0] = 0
        img[0, 1] = 0
        img[1, 0] = 255
        img[1, 1] = 255
        pyr = build_pyramid(img, levels=2)
        assert pyr.levels[1][0, 0] == pytest.approx(127.5)

    def test_early_stop_below_8(self):
        pyr = build_pyramid(np.zeros((16, 16)), levels=5)
        # 16 -> 8; the next level (4) would drop below 8x8
        assert pyr.num_levels == 2

    def test_floor_halving_property(self):
        h, w = 37, 53
        pyr = build_pyramid(np.zeros((h, w)), levels=2)
        assert pyr.levels[1].shape == (h // 2, w // 2)

    def test_levels_must_be_positive(self):
        with pytest.raises(ValueError):
            build_pyramid(np.zeros((16, 16)), levels=0)


class TestBilinearSample:
    def test_integer_positions_exact(self):
        rng = np.random.default_rng(0)
        img = rng.uniform(0, 255, (9, 11))
        xs, ys = np.meshgrid(np.arange(11, dtype=float), np.arange(9, dtype=float))
        assert np.allclose(bilinear_sample(img, xs, ys), img)

    def test_midpoint(self):
        img = np.array([[0.0, 10.0], [20.0, 30.0]])
        val = bilinear_sample(np.pad(img, 3, mode="edge"),
                              np.array([3.5]), np.array([3.5]))
        assert val == pytest.approx(15.0)


class TestValidation:
    def test_gray_clip_range(self):
        with pytest.raises(ClipFormatError, match=r"\[0, 255\]"):
            GrayClip(data=np.full((1, 8, 8), 300.0))

    def test_channel_count(self):
        with pytest.raises(ClipFormatError, match="channel"):
            VideoClip(data=np.zeros((1, 8, 8, 2), dtype=np.uint8))

    def test_data_immutable(self):
        clip = make_clip()
        with pytest.raises(ValueError):
            clip.data[0, 0, 0, 0] = 7
