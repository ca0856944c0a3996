import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relight import correlation as corr
from relight.image import hard_histogram
from relight.retinex import decompose


class TestCosine:
    def test_self_similarity(self, rng):
        h = rng.uniform(0, 1, 256)
        assert corr.cosine_correlation(h, h) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        a, b = np.zeros(256), np.zeros(256)
        a[10], b[200] = 1.0, 1.0
        assert corr.cosine_correlation(a, b) == 0.0

    def test_hand_value(self):
        got = corr.cosine_correlation(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
        assert got == pytest.approx(0.5 / (1.0 * np.sqrt(0.5)))

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError):
            corr.cosine_correlation(np.zeros(4), np.ones(4))

    @given(st.integers(0, 10_000), st.floats(0.1, 10.0))
    @settings(max_examples=40, deadline=None)
    def test_symmetric_bounded_scale_invariant(self, seed, scale):
        rng = np.random.default_rng(seed)
        a = rng.uniform(0, 1, 64) + 1e-6
        b = rng.uniform(0, 1, 64) + 1e-6
        ab = corr.cosine_correlation(a, b)
        assert 0.0 <= ab <= 1.0 + 1e-12
        assert ab == pytest.approx(corr.cosine_correlation(b, a))
        assert ab == pytest.approx(corr.cosine_correlation(scale * a, b))


class TestChroma:
    def test_identical_reflectance(self, rng):
        r = rng.uniform(0.1, 1.0, (8, 8, 3))
        c_h, c_s = corr.chroma_correlations(r, r)
        assert c_h == pytest.approx(1.0) and c_s == pytest.approx(1.0)

    def test_red_vs_cyan(self):
        red = np.zeros((4, 4, 3))
        red[:, :, 0] = 1.0
        cyan = np.zeros((4, 4, 3))
        cyan[:, :, 1:] = 1.0
        c_h, c_s = corr.chroma_correlations(red, cyan)
        assert c_h == 0.0
        assert c_s == pytest.approx(1.0)

    def test_permutation_invariance(self, rng):
        r = rng.uniform(0, 1, (6, 6, 3))
        flat = r.reshape(-1, 3)
        perm = flat[rng.permutation(len(flat))].reshape(r.shape)
        c_h, c_s = corr.chroma_correlations(r, perm)
        assert c_h == pytest.approx(1.0) and c_s == pytest.approx(1.0)


class TestNoise:
    def test_constant_reflectance_zero_map(self):
        n = corr.estimate_noise_map(np.full((5, 5, 3), 0.4))
        np.testing.assert_allclose(n, 0.0, atol=1e-15)

    def test_single_white_pixel_pattern(self):
        img = np.zeros((5, 5, 3))
        img[2, 2, :] = 1.0
        n = corr.estimate_noise_map(img)
        assert n[2, 2] == pytest.approx(8 / 9)
        assert n[1, 2] == pytest.approx(1 / 9)
        assert n[1, 1] == pytest.approx(1 / 9)

    def test_monotone_in_noise_std(self):
        rng = np.random.default_rng(0)
        base = np.full((16, 16, 3), 0.5)
        means = []
        for sigma in (0.01, 0.05, 0.1):
            vals = []
            for _ in range(100):
                noisy = np.clip(base + rng.normal(0, sigma, base.shape), 0, 1)
                vals.append(corr.estimate_noise_map(noisy).mean())
            means.append(np.mean(vals))
        assert means[0] < means[1] < means[2]

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            corr.estimate_noise_map(np.zeros((2, 2, 3)))

    def test_noise_correlation_self(self, rng):
        n = rng.uniform(0, 0.2, (8, 8))
        assert corr.noise_correlation(n, n) == pytest.approx(1.0)

    def test_zero_maps_fully_correlated(self):
        z = np.zeros((4, 4))
        assert corr.noise_correlation(z, z) == pytest.approx(1.0)

    def test_disjoint_levels(self):
        a = np.zeros((4, 4))
        b = np.full((4, 4), 0.9)
        assert corr.noise_correlation(a, b) == 0.0


class TestMapping:
    @pytest.mark.parametrize("raw,expected", [(1.0, 1.0), (-1.0, 0.0), (0.0, 0.5)])
    def test_endpoints_and_midpoint(self, raw, expected):
        assert corr.map_noise_correlation(raw) == expected

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            corr.map_noise_correlation(1.5)


class TestExtract:
    def test_duplicated_reference_equals_single(self, corpus_low, corpus_ref):
        low, ref = corpus_low[0], corpus_ref[0]
        one = corr.extract(low, [ref])
        two = corr.extract(low, [ref, ref])
        np.testing.assert_allclose(two.brightness_hist, one.brightness_hist,
                                   atol=1e-9)
        assert two.c_h == pytest.approx(one.c_h, abs=1e-9)
        assert two.c_s == pytest.approx(one.c_s, abs=1e-9)
        assert two.c_n == pytest.approx(one.c_n, abs=1e-9)

    def test_self_reference(self, corpus_low):
        low = corpus_low[0]
        got = corr.extract(low, [low])
        assert got.c_h == pytest.approx(1.0)
        assert got.c_s == pytest.approx(1.0)

    def test_histogram_averaging(self, corpus_low, corpus_ref):
        low = corpus_low[0]
        pairs = [decompose(r, 0.1, 50) for r in corpus_ref[:2]]
        h1 = hard_histogram(pairs[0].illumination)
        h2 = hard_histogram(pairs[1].illumination)
        got = corr.extract(low, corpus_ref[:2])
        np.testing.assert_allclose(got.brightness_hist, (h1 + h2) / 2, atol=1e-12)

    def test_empty_refs_rejected(self, corpus_low):
        with pytest.raises(ValueError):
            corr.extract(corpus_low[0], [])

    def test_json_round_trip(self, corpus_low, corpus_ref):
        got = corr.extract(corpus_low[0], [corpus_ref[0]])
        back = corr.CorrelationSet.from_json_dict(got.to_json_dict())
        np.testing.assert_allclose(back.brightness_hist, got.brightness_hist)
        assert (back.c_h, back.c_s, back.c_n) == (got.c_h, got.c_s, got.c_n)


class TestGammaHistogram:
    def test_identity_exponent(self, rng):
        lum = rng.uniform(0, 1, (8, 8))
        np.testing.assert_array_equal(corr.gamma_histogram(lum, 1.0),
                                      hard_histogram(lum))

    def test_quarter_to_half(self):
        h = corr.gamma_histogram(np.full((4, 4), 0.25), 2.0)
        assert h[128] == 1.0

    def test_power_oracle(self):
        h = corr.gamma_histogram(np.full((4, 4), 0.0625), 4.0)
        expected_bin = int(0.0625 ** 0.25 * 256)
        assert h[expected_bin] == 1.0

    def test_bad_gamma(self):
        with pytest.raises(ValueError):
            corr.gamma_histogram(np.full((2, 2), 0.5), 0.0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_mean_bin_nondecreasing_in_gamma(self, seed):
        lum = np.random.default_rng(seed).uniform(0.05, 0.95, (6, 6))
        bins = np.arange(256)
        means = [corr.gamma_histogram(lum, g) @ bins for g in (0.5, 1.0, 2.0, 4.0)]
        assert all(a <= b + 1e-9 for a, b in zip(means, means[1:]))
