import numpy as np
import pytest

from motionscale.condition_embed import (EmbedParams, NoiseSchedule, embed_scores,
                                         forward_diffuse, init_branch,
                                         init_embed_params, inject)


class TestEmbedScores:
    def test_output_width(self):
        params = init_embed_params(width=64, seed=0)
        assert embed_scores(3.0, 7.0, params).shape == (64,)

    def test_object_half_ignores_camera_score(self):
        params = init_embed_params(width=64, seed=1)
        base = embed_scores(4.0, 2.0, params)
        for camera in (0.0, 5.0, 9.9):
            out = embed_scores(4.0, camera, params)
            assert np.array_equal(out[:32], base[:32])

    def test_camera_half_ignores_object_score(self):
        params = init_embed_params(width=64, seed=2)
        base = embed_scores(4.0, 2.0, params)
        for obj in (1.0, 6.3, 10.0):
            out = embed_scores(obj, 2.0, params)
            assert np.array_equal(out[32:], base[32:])

    def test_identical_branches_and_scores_give_identical_halves(self):
        branch = init_branch(64, seed=5)
        params = EmbedParams(width=64, object_branch=branch, camera_branch=branch)
        out = embed_scores(6.0, 6.0, params)
        assert np.array_equal(out[:32], out[32:])

    def test_cross_gradients_exactly_zero(self):
        params = init_embed_params(width=32, seed=3)
        h = 1e-4
        d_obj_half = (embed_scores(5.0, 2.0 + h, params)[:16]
                      - embed_scores(5.0, 2.0 - h, params)[:16]) / (2 * h)
        d_cam_half = (embed_scores(5.0 + h, 2.0, params)[16:]
                      - embed_scores(5.0 - h, 2.0, params)[16:]) / (2 * h)
        assert np.all(d_obj_half == 0.0)
        assert np.all(d_cam_half == 0.0)

    def test_own_gradient_nonzero(self):
        params = init_embed_params(width=32, seed=4)
        h = 1e-4
        d_own = (embed_scores(5.0 + h, 2.0, params)[:16]
                 - embed_scores(5.0 - h, 2.0, params)[:16]) / (2 * h)
        assert np.any(np.abs(d_own) > 1e-6)

    def test_width_must_be_multiple_of_four(self):
        with pytest.raises(ValueError):
            init_embed_params(width=30, seed=0)


class TestInject:
    def test_zero_motion_identity(self):
        t = np.arange(8.0)
        assert np.array_equal(inject(t, np.zeros(8)), t)

    def test_commutative(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=8), rng.normal(size=8)
        assert np.array_equal(inject(a, b), inject(b, a))

    def test_width_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            inject(np.zeros(64), np.zeros(32))


class TestNoiseSchedule:
    def test_linear_default(self):
        s = NoiseSchedule.linear()
        assert s.t_steps == 1000
        assert s.betas[0] == pytest.approx(1e-4)
        assert s.betas[-1] == pytest.approx(2e-2)

    def test_alpha_bar_strictly_decreasing(self):
        s = NoiseSchedule.linear(t_steps=50)
        assert np.all(np.diff(s.alpha_bars) < 0.0)

    def test_alpha_bar_zero_convention(self):
        s = NoiseSchedule.from_betas(np.array([0.1, 0.2]))
        assert s.alpha_bars[0] == pytest.approx(0.9)
        assert s.alpha_bars[1] == pytest.approx(0.9 * 0.8)

    def test_beta_range_enforced(self):
        with pytest.raises(ValueError):
            NoiseSchedule.from_betas(np.array([0.0, 0.1]))
        with pytest.raises(ValueError):
            NoiseSchedule.from_betas(np.array([0.5, 1.0]))


def degenerate_schedule(alpha_bar: float) -> NoiseSchedule:
    return NoiseSchedule(betas=np.array([0.5]), alphas=np.array([0.5]),
                         alpha_bars=np.array([alpha_bar]))


class TestForwardDiffuse:
    def test_alpha_bar_one_returns_signal(self):
        z0 = np.arange(6.0).reshape(2, 3)
        noise = np.ones_like(z0) * 9.0
        out = forward_diffuse(z0, 0, degenerate_schedule(1.0), noise)
        assert np.array_equal(out, z0)

    def test_alpha_bar_zero_returns_noise(self):
        z0 = np.arange(6.0).reshape(2, 3)
        noise = np.full_like(z0, -2.0)
        out = forward_diffuse(z0, 0, degenerate_schedule(0.0), noise)
        assert np.array_equal(out, noise)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            forward_diffuse(np.zeros(3), 0, degenerate_schedule(0.5), np.zeros(4))

    def test_step_out_of_range(self):
        with pytest.raises(ValueError, match="outside"):
            forward_diffuse(np.zeros(3), 5, degenerate_schedule(0.5), np.zeros(3))

    def test_monte_carlo_mean_and_variance(self):
        schedule = NoiseSchedule.linear(t_steps=100)
        t = 60
        ab = schedule.alpha_bars[t]
        n = 10_000
        rng = np.random.default_rng(42)
        z0 = np.full(n, 2.0)
        noise = rng.standard_normal(n)
        z_t = forward_diffuse(z0, t, schedule, noise)
        mean_se = np.sqrt((1 - ab) / n)
        assert abs(z_t.mean() - np.sqrt(ab) * 2.0) <= 3 * mean_se
        var_se = (1 - ab) * np.sqrt(2.0 / (n - 1))
        assert abs(z_t.var(ddof=1) - (1 - ab)) <= 3 * var_se
