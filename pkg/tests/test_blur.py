import numpy as np
import pytest

from imgrestore.blur import (
    PsfKind,
    adjoint_map,
    custom_psf,
    delta_psf,
    direct_convolve,
    disk_psf,
    embed,
    forward_map,
    gaussian_psf,
    laplacian_psf,
    load_psf_text,
    log_psf,
    make_psf,
    motion_psf,
    parse_psf_spec,
    save_psf_text,
    unsharp_psf,
)
from imgrestore.grid import ImageGrid

from conftest import random_image


def all_test_kernels():
    """One kernel per kind, sized to fit a 16x16 lattice."""
    return {
        "motion": motion_psf(9, 30.0),
        "log": log_psf(9, 0.5),
        "disk": disk_psf(3.2),
        "unsharp": unsharp_psf(0.2),
        "gaussian": gaussian_psf(9, 1.5),
        "laplacian": laplacian_psf(0.2),
        "delta": delta_psf(),
    }


class TestGenerators:
    def test_unsharp_alpha_zero_matrix(self):
        expected = np.array([[0.0, -1.0, 0.0], [-1.0, 5.0, -1.0], [0.0, -1.0, 0.0]])
        np.testing.assert_allclose(unsharp_psf(0.0).taps, expected, atol=1e-15)

    def test_laplacian_alpha_zero_matrix(self):
        expected = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
        np.testing.assert_allclose(laplacian_psf(0.0).taps, expected, atol=1e-15)

    @pytest.mark.parametrize("name", ["gaussian", "disk", "motion", "unsharp"])
    def test_unit_sum_kernels(self, name):
        taps = all_test_kernels()[name].taps
        assert taps.sum() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("name", ["log", "laplacian"])
    def test_zero_sum_kernels(self, name):
        taps = all_test_kernels()[name].taps
        assert abs(taps.sum()) <= 1e-12

    def test_gaussian_taps_positive(self):
        assert (gaussian_psf(11, 2.0).taps > 0).all()

    def test_gaussian_window_cap(self):
        # Paper-style oversized windows collapse to the effective support.
        k = gaussian_psf(512, 1.5)
        assert k.taps.shape[0] <= 2 * np.ceil(8 * 1.5) + 1
        assert k.taps.sum() == pytest.approx(1.0, abs=1e-12)

    def test_motion_horizontal_is_uniform_line(self):
        k = motion_psf(15, 0.0)
        assert k.taps.shape == (1, 15)
        np.testing.assert_allclose(k.taps, 1.0 / 15, atol=1e-15)

    def test_motion_point_symmetry(self):
        taps = motion_psf(15, 30.0).taps
        np.testing.assert_allclose(taps, taps[::-1, ::-1], atol=1e-14)

    def test_disk_center_full_coverage(self):
        k = disk_psf(2.5)
        assert k.taps[k.center] == k.taps.max()

    @pytest.mark.parametrize(
        "build",
        [
            lambda: motion_psf(0.5, 0.0),
            lambda: gaussian_psf(5, 0.0),
            lambda: log_psf(5, -1.0),
            lambda: disk_psf(0.0),
            lambda: unsharp_psf(1.5),
            lambda: laplacian_psf(-0.1),
        ],
    )
    def test_out_of_range_parameters_rejected(self, build):
        with pytest.raises(ValueError):
            build()

    def test_make_psf_dispatch(self):
        k = make_psf("unsharp", alpha=0.0)
        assert k.kind is PsfKind.UNSHARP

    def test_deterministic_spectra(self):
        a = embed(motion_psf(9, 30.0), 16)
        b = embed(motion_psf(9, 30.0), 16)
        np.testing.assert_array_equal(a.spectrum, b.spectrum)


class TestParsePsfSpec:
    def test_forms(self):
        assert parse_psf_spec("motion:15:30").kind is PsfKind.MOTION
        assert parse_psf_spec("disk:5").kind is PsfKind.DISK
        assert parse_psf_spec("gaussian:1.5").kind is PsfKind.GAUSSIAN
        assert parse_psf_spec("log:512:0.5").kind is PsfKind.LOG
        assert parse_psf_spec("unsharp:0.2").kind is PsfKind.UNSHARP
        assert parse_psf_spec("laplacian:0.2").kind is PsfKind.LAPLACIAN
        assert parse_psf_spec("delta").kind is PsfKind.DELTA

    @pytest.mark.parametrize("bad", ["motion:15", "disk", "triangle:3", "delta:1", "gaussian:a:b:c"])
    def test_malformed_specs_rejected(self, bad):
        with pytest.raises(ValueError):
            parse_psf_spec(bad)


class TestEmbed:
    def test_delta_spectrum_is_one(self):
        tf = embed(delta_psf(), 12)
        np.testing.assert_allclose(tf.spectrum, 1.0, atol=1e-14)

    def test_gaussian_dc_gain(self):
        tf = embed(gaussian_psf(9, 1.5), 16)
        assert tf.spectrum[0, 0].real == pytest.approx(1.0, abs=1e-12)
        assert abs(tf.spectrum[0, 0].imag) <= 1e-12

    def test_log_zero_dc(self):
        tf = embed(log_psf(9, 0.5), 16)
        assert abs(tf.spectrum[0, 0]) <= 1e-12

    def test_conjugate_symmetry(self):
        tf = embed(motion_psf(9, 30.0), 16)
        s = tf.spectrum
        flipped = np.conj(np.roll(s[::-1, ::-1], shift=(1, 1), axis=(0, 1)))
        np.testing.assert_allclose(s, flipped, atol=1e-12)

    def test_kernel_too_large(self):
        with pytest.raises(ValueError):
            embed(gaussian_psf(17, 2.0), 8)


class TestForwardAdjoint:
    def test_delta_is_identity(self, img8):
        tf = embed(delta_psf(), 8)
        np.testing.assert_allclose(forward_map(img8, tf).values, img8.values, atol=1e-12)
        np.testing.assert_allclose(adjoint_map(img8, tf).values, img8.values, atol=1e-12)

    def test_constant_preserved_by_low_pass(self):
        m = ImageGrid(np.full((16, 16), 42.0))
        tf = embed(gaussian_psf(9, 1.5), 16)
        np.testing.assert_allclose(forward_map(m, tf).values, 42.0, atol=1e-10)

    def test_side_mismatch(self, img8):
        tf = embed(delta_psf(), 12)
        with pytest.raises(ValueError):
            forward_map(img8, tf)
        with pytest.raises(ValueError):
            adjoint_map(img8, tf)

    @pytest.mark.parametrize("name", sorted(all_test_kernels()))
    def test_adjoint_identity(self, name, rng):
        psf = all_test_kernels()[name]
        side = 12
        tf = embed(psf, side)
        x = random_image(rng, side)
        y = random_image(rng, side)
        lhs = float(np.vdot(forward_map(x, tf).values, y.values))
        rhs = float(np.vdot(x.values, adjoint_map(y, tf).values))
        scale = np.linalg.norm(x.values) * np.linalg.norm(y.values)
        assert abs(lhs - rhs) <= 1e-12 * scale

    def test_adjoint_identity_asymmetric_kernel(self, rng):
        taps = rng.normal(size=(3, 5))
        psf = custom_psf(taps)
        tf = embed(psf, 12)
        x = random_image(rng, 12)
        y = random_image(rng, 12)
        lhs = float(np.vdot(forward_map(x, tf).values, y.values))
        rhs = float(np.vdot(x.values, adjoint_map(y, tf).values))
        scale = np.linalg.norm(x.values) * np.linalg.norm(y.values)
        assert abs(lhs - rhs) <= 1e-12 * scale

    @pytest.mark.parametrize("name", ["gaussian", "disk", "log", "laplacian", "motion"])
    def test_symmetric_kernels_self_adjoint(self, name, rng):
        psf = all_test_kernels()[name]
        tf = embed(psf, 16)
        x = random_image(rng, 16)
        fwd = forward_map(x, tf).values
        adj = adjoint_map(x, tf).values
        np.testing.assert_allclose(fwd, adj, atol=1e-12 * np.linalg.norm(x.values))

    def test_mean_preservation_unit_sum(self, rng):
        x = random_image(rng, 16)
        tf = embed(disk_psf(3.2), 16)
        assert forward_map(x, tf).values.mean() == pytest.approx(
            x.values.mean(), rel=1e-12
        )

    def test_linearity(self, rng):
        tf = embed(motion_psf(9, 30.0), 12)
        x = random_image(rng, 12)
        y = random_image(rng, 12)
        combo = forward_map(ImageGrid(1.5 * x.values - 0.5 * y.values), tf).values
        parts = 1.5 * forward_map(x, tf).values - 0.5 * forward_map(y, tf).values
        np.testing.assert_allclose(combo, parts, atol=1e-10)


class TestDirectConvolveOracle:
    def test_delta_identity(self, img8):
        out = direct_convolve(img8, delta_psf())
        np.testing.assert_array_equal(out.values, img8.values)

    def test_scalar_kernel(self):
        m = ImageGrid(np.array([[1.0, 0.0], [0.0, 0.0]]))
        out = direct_convolve(m, custom_psf([[2.0]]))
        np.testing.assert_allclose(out.values, [[2.0, 0.0], [0.0, 0.0]])

    @pytest.mark.parametrize("name", sorted(all_test_kernels()))
    @pytest.mark.parametrize("side", [8, 12, 16])
    def test_fft_path_matches_dense_oracle(self, name, side, rng):
        psf = all_test_kernels()[name]
        if psf.taps.shape[0] > side or psf.taps.shape[1] > side:
            pytest.skip("kernel larger than lattice")
        m = random_image(rng, side)
        fast = forward_map(m, embed(psf, side)).values
        slow = direct_convolve(m, psf).values
        np.testing.assert_allclose(fast, slow, atol=1e-10)

    def test_wraparound_explicit(self):
        # Off-center tap wraps periodically: delta at (1,0) relative to center.
        m = ImageGrid(np.eye(4))
        taps = np.zeros((3, 3))
        taps[2, 1] = 1.0  # one row below center
        out = direct_convolve(m, custom_psf(taps))
        np.testing.assert_allclose(out.values, np.roll(np.eye(4), 1, axis=0))


class TestPsfText:
    def test_round_trip(self, tmp_path, rng):
        psf = motion_psf(9, 30.0)
        path = tmp_path / "kernel.txt"
        save_psf_text(psf, path)
        loaded = load_psf_text(path)
        np.testing.assert_array_equal(loaded.taps, psf.taps)

    def test_malformed_matrix_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2 3\n4 5\n")
        with pytest.raises(ValueError):
            load_psf_text(path)
