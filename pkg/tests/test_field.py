"""Field primitives: elementwise ops, masks, crops, metrics, image output."""

import io

import numpy as np
import pytest

from optomul.errors import ConfigurationError, MetricError
from optomul.field import (ComplexField, IntensityImage, crop, intensity,
                           mask_rect, pointwise_add, pointwise_mul,
                           read_raw_sidecar, scale, xcorr)

PITCH = 0.001
LAM = 0.0002


def make_field(samples):
    return ComplexField(np.asarray(samples, dtype=complex), PITCH, LAM)


def random_field(n=16, seed=0):
    rng = np.random.default_rng(seed)
    return make_field(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))


class TestConstruction:
    def test_rejects_bad_grids(self):
        with pytest.raises(ConfigurationError):
            ComplexField(np.zeros((3, 4), complex), PITCH, LAM)
        with pytest.raises(ConfigurationError):
            ComplexField(np.zeros((1, 1), complex), PITCH, LAM)
        with pytest.raises(ConfigurationError):
            ComplexField(np.zeros((4, 4), complex), -1.0, LAM)
        with pytest.raises(ConfigurationError):
            ComplexField(np.zeros((4, 4), complex), PITCH, 0.0)

    def test_rejects_non_finite(self):
        bad = np.zeros((4, 4), complex)
        bad[1, 2] = np.nan
        with pytest.raises(ConfigurationError):
            ComplexField(bad, PITCH, LAM)

    def test_centered_coordinates(self):
        f = make_field(np.zeros((5, 5)))
        assert f.x_axis()[2] == 0.0
        assert f.x_axis()[4] == pytest.approx(2 * PITCH)
        assert f.y_axis()[0] == pytest.approx(2 * PITCH)  # row 0 on top
        assert f.extent == pytest.approx(5 * PITCH)

    def test_samples_immutable(self):
        f = random_field()
        with pytest.raises(ValueError):
            f.samples[0, 0] = 1.0


class TestPointwise:
    def test_mul_identity(self):
        f = random_field()
        ones = make_field(np.ones((16, 16)))
        out = pointwise_mul(ones, f)
        assert np.array_equal(out.samples, f.samples)

    def test_mul_imaginary_units(self):
        a = make_field(np.full((8, 8), 1j))
        b = make_field(np.full((8, 8), 1j))
        out = pointwise_mul(a, b)
        assert np.allclose(out.samples, -1.0)

    def test_mul_single_pixel(self):
        s = np.zeros((8, 8), complex)
        s[3, 4] = 3.0
        out = pointwise_mul(make_field(s), make_field(s))
        assert out.samples[3, 4] == 9.0
        assert np.count_nonzero(out.samples) == 1

    def test_mul_mismatch(self):
        f = random_field(16)
        g = random_field(8)
        with pytest.raises(ConfigurationError):
            pointwise_mul(f, g)
        h = ComplexField(f.samples, PITCH * 2, LAM)
        with pytest.raises(ConfigurationError):
            pointwise_mul(f, h)

    def test_add_zero_and_cancel(self):
        f = random_field()
        zero = make_field(np.zeros((16, 16)))
        assert np.array_equal(pointwise_add(f, zero).samples, f.samples)
        neg = scale(f, -1.0)
        assert np.allclose(pointwise_add(f, neg).samples, 0.0)

    def test_add_quadrature_phasors(self):
        a = make_field(np.full((4, 4), 2.0))
        b = make_field(np.full((4, 4), 2.0j))
        out = pointwise_add(a, b)
        assert np.allclose(np.abs(out.samples), 2.0 * np.sqrt(2.0))

    def test_add_commutes_to_tolerance(self):
        f, g = random_field(seed=1), random_field(seed=2)
        ab = pointwise_add(f, g).samples
        ba = pointwise_add(g, f).samples
        assert np.linalg.norm(ab - ba) <= 1e-12 * np.linalg.norm(ab)


class TestMaskAndCrop:
    def test_full_frame_mask_keeps_all(self):
        f = random_field()
        out = mask_rect(f, (-0.5, -0.5), (0.5, 0.5))
        assert np.array_equal(out.samples, f.samples)

    def test_corner_order_irrelevant(self):
        f = random_field()
        a = mask_rect(f, (-0.5, 0.164179), (0.164179, -0.5))
        b = mask_rect(f, (0.164179, -0.5), (-0.5, 0.164179))
        assert np.array_equal(a.samples, b.samples)

    def test_lower_left_mask(self):
        f = make_field(np.ones((67, 67)))
        out = mask_rect(f, (-0.5, 0.164179), (0.164179, -0.5))
        # pixels with centers <= 11/67 of the extent survive on each axis
        xn = f.x_axis() / f.extent
        keep = xn <= 0.164179
        assert np.count_nonzero(out.samples) == keep.sum() ** 2

    def test_degenerate_corners_keep_single_cross(self):
        n = 9
        f = make_field(np.ones((n, n)))
        c = f.x_axis()[6] / f.extent
        out = mask_rect(f, (c, c), (c, c))
        # scalar reference: loop every pixel
        expected = np.zeros((n, n))
        xs = f.x_axis() / f.extent
        ys = f.y_axis() / f.extent
        for i in range(n):
            for j in range(n):
                if xs[j] == c and ys[i] == c:
                    expected[i, j] = 1.0
        assert np.array_equal(out.samples.real, expected)

    def test_mask_idempotent(self):
        f = random_field()
        c1, c2 = (-0.3, 0.41), (0.12, -0.07)
        once = mask_rect(f, c1, c2)
        twice = mask_rect(once, c1, c2)
        assert np.array_equal(once.samples, twice.samples)

    def test_mask_rejects_out_of_range(self):
        f = random_field()
        with pytest.raises(ConfigurationError):
            mask_rect(f, (-0.6, 0.0), (0.5, 0.5))

    def test_crop_full_and_half(self):
        f = random_field(16)
        assert np.array_equal(crop(f, f.extent).samples, f.samples)
        half = crop(f, f.extent / 2)
        inner = np.abs(f.x_axis()) <= f.extent / 4
        assert np.count_nonzero(half.samples) <= inner.sum() ** 2
        assert np.array_equal(half.samples[4:12, 4:12], f.samples[4:12, 4:12])

    def test_crop_composition_is_min(self):
        f = random_field(17)
        w1, w2 = 0.011, 0.007
        a = crop(crop(f, w1), w2)
        b = crop(f, min(w1, w2))
        assert np.array_equal(a.samples, b.samples)

    def test_crop_rejects_nonpositive(self):
        with pytest.raises(ConfigurationError):
            crop(random_field(), 0.0)


class TestMetricsAndImages:
    def test_scale_identity_and_intensity_square(self):
        f = random_field()
        assert np.array_equal(scale(f, 1.0).samples, f.samples)
        g = 2.5
        i1 = intensity(scale(f, g)).samples
        i0 = intensity(f).samples
        assert np.linalg.norm(i1 - g * g * i0) <= 1e-12 * np.linalg.norm(i1)

    def test_xcorr_self_and_scale_invariance(self):
        img = intensity(random_field(seed=3))
        assert xcorr(img, img) == pytest.approx(1.0)
        doubled = IntensityImage(2 * img.samples, img.pixel_pitch)
        assert xcorr(img, doubled) == pytest.approx(1.0)

    def test_xcorr_zero_variance(self):
        flat = IntensityImage(np.ones((16, 16)), PITCH)
        img = intensity(random_field())
        with pytest.raises(MetricError):
            xcorr(flat, img)

    def test_pgm_format(self):
        img = intensity(random_field(seed=4))
        blob = img.to_pgm_bytes()
        header, rest = blob.split(b"\n", 1)
        assert header == b"P5"
        dims, rest = rest.split(b"\n", 1)
        assert dims == b"16 16"
        maxval, payload = rest.split(b"\n", 1)
        assert maxval == b"65535"
        data = np.frombuffer(payload, dtype=">u2").reshape(16, 16)
        assert data.max() == 65535  # image max maps to full scale
        expect = np.round(img.samples * (65535.0 / img.samples.max()))
        assert np.array_equal(data.astype(float), expect)

    def test_raw_sidecar_round_trip(self, tmp_path):
        img = intensity(random_field(seed=5))
        path = tmp_path / "img.pgm"
        img.write(path)
        assert path.exists()
        back = read_raw_sidecar(str(path) + ".raw", 16)
        assert np.array_equal(back, img.samples)
