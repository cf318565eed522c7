import numpy as np
import pytest

from imgrestore.blur import delta_psf, embed, forward_map, gaussian_psf
from imgrestore.errors import BetaEstimationError
from imgrestore.grid import ImageGrid, NoiseSpec, add_gaussian_noise, misfit
from imgrestore.pipelines import (
    LSD,
    SD,
    deblur,
    denoise_explicit,
    denoise_hybrid,
    estimate_beta,
    restore_split,
    sharpen_tukey,
)
from imgrestore.regularization import (
    RegKind,
    RegularizerSpec,
    TUKEY_SCALE,
    adaptive_threshold,
    reg_gradient,
)
from imgrestore.solvers import PolicyKind, StepPolicy, StopRule
from imgrestore.synthetic import synthetic_toy, two_level_image

from conftest import random_image


def noisy_instance(side=48, eta=10.0, seed=0):
    rng = np.random.default_rng(seed)
    base = np.tile(np.linspace(70, 180, side), (side, 1))
    base[side // 3 : 2 * side // 3, side // 4 : 3 * side // 4] += 45
    clean = ImageGrid(np.clip(base + rng.normal(0, 2, (side, side)), 0, 255))
    return clean, add_gaussian_noise(clean, NoiseSpec(eta, seed + 1))


class TestDenoiseExplicit:
    def test_constant_data_zero_iterations(self):
        b = ImageGrid(np.full((32, 32), 99.0))
        report = denoise_explicit(b)
        assert report.total_iterations == 0
        np.testing.assert_array_equal(report.output.values, b.values)
        assert report.beta_used is None

    def test_reduces_noise(self):
        clean, noisy = noisy_instance(64)
        report = denoise_explicit(noisy, SD, StopRule(1e-4, 500))
        assert misfit(report.output, clean) < misfit(noisy, clean)
        assert report.stages[0].name == "denoise"
        assert report.stages[0].seconds >= 0.0


class TestEstimateBeta:
    def test_one_descent_step_gives_positive_weight(self, rng):
        b = random_image(rng, 32)
        spec = RegularizerSpec(RegKind.HUBER).resolve(b)
        step = 1e-5
        m_bar = ImageGrid(b.values - step * reg_gradient(b, spec).values)
        assert estimate_beta(m_bar, b, spec) > 0

    def test_positive_after_pre_denoise(self):
        _, noisy = noisy_instance(48)
        report = denoise_explicit(noisy, SD, StopRule(1e-3, 200))
        beta = estimate_beta(report.output, noisy)
        assert beta > 0

    def test_degenerate_on_identical_images(self, rng):
        b = random_image(rng, 16)
        with pytest.raises(BetaEstimationError) as err:
            estimate_beta(b, b)
        assert err.value.degenerate

    def test_anti_descent_direction_rejected(self, rng):
        b = random_image(rng, 32)
        spec = RegularizerSpec(RegKind.HUBER).resolve(b)
        m_bar = ImageGrid(b.values + 1e-5 * reg_gradient(b, spec).values)
        with pytest.raises(BetaEstimationError) as err:
            estimate_beta(m_bar, b, spec)
        assert not err.value.degenerate


class TestDenoiseHybrid:
    def test_constant_data_skips_implicit_stage(self):
        b = ImageGrid(np.full((32, 32), 77.0))
        report = denoise_hybrid(b)
        assert [s.name for s in report.stages] == ["denoise"]
        assert report.beta_used is None
        np.testing.assert_array_equal(report.output.values, b.values)

    def test_stage_structure_and_beta(self):
        _, noisy = noisy_instance(48)
        report = denoise_hybrid(noisy, pre_tol=1e-3, irls_iters=2)
        assert [s.name for s in report.stages] == ["denoise", "irls"]
        assert report.beta_used > 0
        assert report.stage("irls").iterations == 2

    def test_total_iterations_partition(self):
        _, noisy = noisy_instance(48)
        report = denoise_hybrid(noisy, pre_tol=1e-3, irls_iters=2)
        assert report.total_iterations == sum(len(s.records) for s in report.stages)


class TestHybridBeatsStrictExplicit:
    def test_hybrid_work_is_small_fraction_of_strict_explicit(self):
        """Pre-denoise + a few implicit solves replace a long strict descent."""
        rng = np.random.default_rng(7)
        side = 128
        base = np.tile(np.linspace(70, 180, side), (side, 1))
        base[30:90, 20:80] += 45
        clean = ImageGrid(np.clip(base, 0, 255))
        noisy = add_gaussian_noise(clean, NoiseSpec(10.0, seed=2))

        hybrid = denoise_hybrid(noisy, pre_tol=1e-4, irls_iters=3,
                                policy=StepPolicy(PolicyKind.SD))
        strict = denoise_explicit(noisy, SD, StopRule(1e-5, 4000))
        assert hybrid.total_iterations < 0.3 * strict.total_iterations
        # and the hybrid output is still a genuine denoise of the data
        assert misfit(hybrid.output, clean) < misfit(noisy, clean)


class TestSharpenTukey:
    def test_two_level_image_exactly_invariant(self):
        m = two_level_image(64, low=40.0, high=200.0)
        report = sharpen_tukey(m, steps=10)
        np.testing.assert_array_equal(report.output.values, m.values)

    def test_huber_counterpart_moves_image(self):
        m = two_level_image(64, low=40.0, high=200.0)
        report = denoise_explicit(
            m, SD, StopRule(1e-12, 10), RegularizerSpec(RegKind.HUBER)
        )
        assert np.linalg.norm(report.output.values - m.values) > 0

    def test_runs_requested_steps(self):
        _, noisy = noisy_instance(48)
        pre = denoise_explicit(noisy, SD, StopRule(1e-3, 200))
        report = sharpen_tukey(pre.output, steps=5)
        assert report.stage("sharpen").iterations == 5

    def test_threshold_fixed_at_entry(self):
        _, noisy = noisy_instance(48)
        pre = denoise_explicit(noisy, SD, StopRule(1e-3, 200)).output
        expected = TUKEY_SCALE * adaptive_threshold(pre)
        report = sharpen_tukey(pre, steps=3)
        assert report.beta_used is None
        assert report.stage("sharpen").iterations == 3
        assert expected > 0

    def test_rejects_zero_steps(self, rng):
        with pytest.raises(ValueError):
            sharpen_tukey(random_image(rng, 16), steps=0)


class TestDeblur:
    def test_delta_psf_noiseless_is_near_identity(self, rng):
        b = random_image(rng, 32, lo=50.0, hi=200.0)
        report = deblur(b, delta_psf(), beta=1e-10, stop=StopRule(1e-4, 50))
        assert report.total_iterations <= 2
        np.testing.assert_allclose(report.output.values, b.values, atol=1e-2)

    def test_recovers_blurred_image(self):
        clean, _ = noisy_instance(48, eta=0.0)
        psf = gaussian_psf(9, 1.2)
        blurred = forward_map(clean, embed(psf, 48))
        report = deblur(blurred, psf, beta=1e-4, stop=StopRule(1e-4, 300))
        assert misfit(report.output, clean) < misfit(blurred, clean)

    def test_rejects_nonpositive_beta(self, rng):
        with pytest.raises(ValueError):
            deblur(random_image(rng, 16), delta_psf(), beta=0.0)


class TestRestoreSplit:
    def test_stage_names_and_partition(self):
        clean = synthetic_toy(48)
        psf = gaussian_psf(7, 1.0)
        data = add_gaussian_noise(forward_map(clean, embed(psf, 48)), NoiseSpec(5.0, 3))
        report = restore_split(data, psf, beta=5e-4, sharpen_steps=4,
                               stop=StopRule(1e-4, 300))
        assert [s.name for s in report.stages] == ["pre_denoise", "deblur", "sharpen"]
        assert report.beta_used == 5e-4
        assert report.total_iterations == sum(s.iterations for s in report.stages)
        assert report.stage("sharpen").iterations == 4

    def test_constant_input_pre_denoise_exits_immediately(self):
        b = ImageGrid(np.full((32, 32), 120.0))
        report = restore_split(b, delta_psf(), beta=1e-6, sharpen_steps=2,
                               stop=StopRule(1e-4, 50))
        assert report.stage("pre_denoise").iterations == 0

    def test_rejects_nonpositive_beta(self, rng):
        with pytest.raises(ValueError):
            restore_split(random_image(rng, 16), delta_psf(), beta=-1.0)


class TestMisfitTracksNoise:
    def test_pre_denoise_misfit_estimates_noise_level(self):
        side = 128
        rng = np.random.default_rng(12)
        base = np.tile(np.linspace(70, 180, side), (side, 1))
        base[40:90, 30:100] += 40
        clean = ImageGrid(np.clip(base, 0, 255))
        spec = NoiseSpec(10.0, seed=4)
        noisy = add_gaussian_noise(clean, spec)
        s = 0.10 * float(np.linalg.norm(clean.values)) / side
        report = denoise_explicit(noisy, SD, StopRule(1e-4, 1000))
        assert abs(misfit(report.output, noisy) - s) / s <= 0.25
