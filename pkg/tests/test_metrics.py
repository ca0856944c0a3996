import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relight import metrics
from relight.metrics import SSIM_C1, SSIM_C2, SSIM_SIGMA, SSIM_WINDOW


def brute_force_ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Independent sliding-window oracle with explicit loops."""
    k = SSIM_WINDOW
    offsets = np.arange(k) - (k - 1) / 2
    g = np.exp(-(offsets ** 2) / (2 * SSIM_SIGMA ** 2))
    w = np.outer(g, g)
    w /= w.sum()
    vals = []
    for y in range(a.shape[0] - k + 1):
        for x in range(a.shape[1] - k + 1):
            wa = a[y:y + k, x:x + k]
            wb = b[y:y + k, x:x + k]
            mu_a = (w * wa).sum()
            mu_b = (w * wb).sum()
            var_a = (w * (wa - mu_a) ** 2).sum()
            var_b = (w * (wb - mu_b) ** 2).sum()
            cov = (w * (wa - mu_a) * (wb - mu_b)).sum()
            num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
            den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
            vals.append(num / den)
    return float(np.mean(vals))


class TestPsnr:
    def test_identical_hits_cap(self, rng):
        img = rng.uniform(0, 1, (8, 8, 3))
        assert metrics.psnr(img, img) == 99.0

    def test_mse_001_is_20db(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.1)
        assert metrics.psnr(a, b) == pytest.approx(20.0)

    def test_log_oracle(self):
        a = np.zeros((8, 8))
        b = np.full((8, 8), np.sqrt(0.0025))
        assert metrics.psnr(a, b) == pytest.approx(10 * np.log10(1 / 0.0025))

    def test_symmetry(self, rng):
        a, b = rng.uniform(0, 1, (6, 6)), rng.uniform(0, 1, (6, 6))
        assert metrics.psnr(a, b) == metrics.psnr(b, a)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            metrics.psnr(np.zeros((4, 4)), np.zeros((5, 4)))


class TestSsim:
    def test_self_similarity(self, rng):
        img = rng.uniform(0, 1, (16, 16))
        assert metrics.ssim(img, img) == pytest.approx(1.0)

    def test_constant_pair_closed_form(self):
        a = np.zeros((16, 16))
        b = np.ones((16, 16))
        expected = (SSIM_C1 * SSIM_C2) / ((1 + SSIM_C1) * SSIM_C2)
        assert metrics.ssim(a, b) == pytest.approx(expected)

    def test_symmetry(self, rng):
        a, b = rng.uniform(0, 1, (14, 14)), rng.uniform(0, 1, (14, 14))
        assert metrics.ssim(a, b) == pytest.approx(metrics.ssim(b, a))

    @given(st.integers(0, 10_000))
    @settings(max_examples=15, deadline=None)
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.uniform(0, 1, (16, 16))
        b = np.clip(a + rng.normal(0, 0.1, a.shape), 0, 1)
        assert metrics.ssim(a, b) == pytest.approx(brute_force_ssim(a, b),
                                                   abs=1e-6)

    def test_channel_averaging(self, rng):
        a = rng.uniform(0, 1, (16, 16, 3))
        b = rng.uniform(0, 1, (16, 16, 3))
        per_channel = [metrics.ssim(a[:, :, c], b[:, :, c]) for c in range(3)]
        assert metrics.ssim(a, b) == pytest.approx(np.mean(per_channel))

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            metrics.ssim(np.zeros((8, 8)), np.zeros((8, 8)))


class TestHistL1:
    def test_identical(self, rng):
        h = rng.uniform(0, 1, 256)
        h /= h.sum()
        assert metrics.hist_l1(h, h) == 0.0

    def test_disjoint_maximum(self):
        a, b = np.zeros(256), np.zeros(256)
        a[0], b[255] = 1.0, 1.0
        assert metrics.hist_l1(a, b) == 2.0

    def test_hand_value(self):
        assert metrics.hist_l1(np.array([0.5, 0.5]),
                               np.array([0.25, 0.75])) == pytest.approx(0.5)

    def test_bin_mismatch(self):
        with pytest.raises(ValueError):
            metrics.hist_l1(np.zeros(256), np.zeros(128))

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_triangle_inequality(self, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (rng.uniform(0, 1, 32) for _ in range(3))
        assert metrics.hist_l1(a, c) <= (metrics.hist_l1(a, b)
                                         + metrics.hist_l1(b, c) + 1e-12)


class TestEvaluate:
    def test_report_fields(self, rng):
        img = rng.uniform(0, 1, (16, 16, 3))
        noisy = np.clip(img + rng.normal(0, 0.05, img.shape), 0, 1)
        report = metrics.evaluate(noisy, img)
        d = report.to_json_dict()
        assert set(d) == {"psnr_db", "ssim", "hist_l1"}
        assert d["psnr_db"] < 99.0 and -1 <= d["ssim"] <= 1 and 0 <= d["hist_l1"] <= 2
