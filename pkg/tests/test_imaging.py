import io

import numpy as np
import pytest
from PIL import Image
from pydantic import ValidationError

from app.core.exceptions import ImageIOError, InvalidArgumentError
from app.schemas.imaging import BlurKernel, KernelKind
from app.services.image_io import read_image, write_image
from app.services.imaging import (
    add_gaussian_noise,
    add_salt_pepper,
    blur_periodic,
    bsnr,
    gaussian_noise,
    mae,
    make_kernel,
    make_phantom,
    psnr,
    rel_err,
)


class TestKernels:
    def test_average(self):
        kernel = make_kernel(KernelKind.AVERAGE, 9)
        assert kernel.shape == (9, 9)
        np.testing.assert_allclose(kernel.taps, 1.0 / 81.0)
        assert kernel.describe() == "average:9"

    def test_gaussian_is_normalized_and_peaked(self):
        kernel = make_kernel(KernelKind.GAUSSIAN, 7, 5.0)
        taps = kernel.taps
        assert taps.sum() == pytest.approx(1.0, abs=1e-12)
        assert taps[3, 3] == taps.max()
        np.testing.assert_allclose(taps, taps.T)
        assert taps[3, 3] / taps[0, 0] == pytest.approx(np.exp(0.36))
        assert kernel.describe() == "gaussian:7:5"

    def test_even_footprint_is_padded_to_odd(self):
        kernel = make_kernel(KernelKind.AVERAGE, 4)
        assert kernel.shape == (5, 5)
        assert np.all(kernel.taps[0] == 0.0) and np.all(kernel.taps[:, 0] == 0.0)
        assert kernel.taps.sum() == pytest.approx(1.0)

    def test_delta(self):
        kernel = make_kernel(KernelKind.DELTA)
        img = np.random.default_rng(0).random((6, 6))
        np.testing.assert_array_equal(blur_periodic(img, kernel), img)

    def test_gaussian_needs_sigma(self):
        with pytest.raises(InvalidArgumentError):
            make_kernel(KernelKind.GAUSSIAN, 7)

    def test_unnormalized_taps_rejected(self):
        with pytest.raises(ValidationError):
            BlurKernel(kind=KernelKind.AVERAGE, size=3, taps=np.ones((3, 3)))


class TestBlur:
    def test_preserves_mean_and_constants(self, rng):
        kernel = make_kernel(KernelKind.GAUSSIAN, 7, 2.0)
        img = rng.random((16, 20))
        assert blur_periodic(img, kernel).mean() == pytest.approx(img.mean())
        np.testing.assert_allclose(blur_periodic(np.full((9, 9), 0.4), kernel), 0.4)

    def test_wraps_around(self):
        img = np.zeros((5, 5))
        img[0, 0] = 1.0
        out = blur_periodic(img, make_kernel(KernelKind.AVERAGE, 3))
        assert out[4, 4] == pytest.approx(1.0 / 9.0)
        assert out[2, 2] == 0.0

    def test_kernel_larger_than_image(self):
        with pytest.raises(InvalidArgumentError):
            blur_periodic(np.zeros((4, 4)), make_kernel(KernelKind.AVERAGE, 5))


class TestNoise:
    def test_bsnr_of_unit_norm_signal(self):
        signal = np.zeros((4, 4))
        signal[0, 0] = 1.0
        noise = gaussian_noise(signal, 40.0, rng_seed=1)
        assert np.linalg.norm(noise) == pytest.approx(1e-2)

    def test_target_bsnr_is_met(self, rng):
        img = rng.random((32, 32))
        noisy = add_gaussian_noise(img, 40.0, rng_seed=7)
        assert abs(bsnr(img, noisy - img) - 40.0) <= 1e-10

    def test_seeded_noise_repeats(self, rng):
        img = rng.random((8, 8))
        np.testing.assert_array_equal(
            add_gaussian_noise(img, 30.0, rng_seed=3), add_gaussian_noise(img, 30.0, rng_seed=3)
        )

    def test_zero_noise_bsnr_is_infinite(self):
        assert bsnr(np.ones(4), np.zeros(4)) == float("inf")

    def test_salt_and_pepper_fraction(self):
        img = np.full((200, 200), 0.5)
        noisy = add_salt_pepper(img, 0.3, rng_seed=0)
        changed = noisy != 0.5
        assert set(np.unique(noisy[changed])) <= {0.0, 1.0}
        assert changed.mean() == pytest.approx(0.3, abs=0.01)
        assert (noisy == 0.0).mean() == pytest.approx(0.15, abs=0.01)

    def test_salt_and_pepper_edges(self, rng):
        img = rng.random((10, 10))
        np.testing.assert_array_equal(add_salt_pepper(img, 0.0, rng_seed=1), img)
        assert set(np.unique(add_salt_pepper(img, 1.0, rng_seed=1))) <= {0.0, 1.0}
        with pytest.raises(InvalidArgumentError):
            add_salt_pepper(img, 1.5)


class TestMetrics:
    def test_psnr_of_constant_offset(self):
        ref = np.zeros((8, 8))
        assert psnr(ref + 0.1, ref) == pytest.approx(20.0)

    def test_identical_images(self, rng):
        img = rng.random((4, 4))
        assert psnr(img, img) == float("inf")
        assert rel_err(img, img) == 0.0
        assert mae(img, img) == 0.0

    def test_rel_err_and_mae(self):
        ref = np.array([[3.0, 4.0]])
        assert rel_err(np.array([[3.0, 3.0]]), ref) == pytest.approx(0.2)
        assert mae(np.array([[2.0, 6.0]]), ref) == pytest.approx(1.5)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            psnr(np.zeros((3, 3)), np.zeros((3, 4)))

    def test_zero_reference(self):
        with pytest.raises(InvalidArgumentError):
            rel_err(np.ones((2, 2)), np.zeros((2, 2)))


class TestPhantom:
    def test_piecewise_constant_in_range(self):
        img = make_phantom(64)
        assert img.shape == (64, 64)
        assert img.min() == 0.0 and img.max() == 1.0
        assert set(np.unique(img)) <= {0.0, 0.2, 0.4, 0.6, 0.85, 1.0}

    def test_minimum_size(self):
        with pytest.raises(InvalidArgumentError):
            make_phantom(8)


class TestImageIO:
    @pytest.mark.parametrize("suffix", [".png", ".pgm"])
    def test_write_then_read(self, tmp_path, suffix):
        img = np.arange(48, dtype=float).reshape(6, 8) * 5.0 / 255.0
        path = write_image(tmp_path / f"img{suffix}", img)
        np.testing.assert_allclose(read_image(path), img, atol=1e-12)

    def test_pgm_is_binary_graymap(self, tmp_path):
        path = write_image(tmp_path / "out.pgm", np.zeros((3, 3)))
        assert path.read_bytes().startswith(b"P5")

    def test_out_of_range_values_are_clipped(self, tmp_path):
        path = write_image(tmp_path / "clip.png", np.array([[-0.5, 1.7]]))
        np.testing.assert_array_equal(read_image(path), [[0.0, 1.0]])

    def test_reads_uploads(self):
        buffer = io.BytesIO()
        Image.fromarray(np.full((4, 4), 51, dtype=np.uint8)).save(buffer, format="PNG")
        buffer.seek(0)
        np.testing.assert_allclose(read_image(buffer), 0.2)

    def test_unsupported_suffix(self, tmp_path):
        with pytest.raises(ImageIOError):
            write_image(tmp_path / "img.jpg", np.zeros((2, 2)))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageIOError):
            read_image(tmp_path / "missing.png")

    def test_colour_images_rejected(self, tmp_path):
        path = tmp_path / "rgb.png"
        Image.new("RGB", (4, 4)).save(path)
        with pytest.raises(ImageIOError):
            read_image(path)
