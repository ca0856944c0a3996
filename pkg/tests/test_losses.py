import numpy as np
import pytest

from relight import losses
from relight.autodiff import Tensor
from relight.image import hard_histogram, soft_histogram
from relight.nets import perceptual_extractor

from conftest import finite_diff, rel_err

TOL = 1e-3


@pytest.fixture(scope="module")
def extractor():
    return perceptual_extractor()


def chw(img_hwc: np.ndarray) -> np.ndarray:
    return img_hwc.transpose(2, 0, 1)


class TestHistogramLoss:
    def test_zero_when_soft_hist_equals_ref(self, rng):
        lum = rng.uniform(0.1, 0.9, (8, 8))
        ref = soft_histogram(lum, bandwidth=1.0)
        loss = losses.histogram_loss(Tensor(lum), ref)
        assert loss.item() == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_single_bins_hit_maximum(self):
        lum = np.full((4, 4), (10 + 0.5) / 256)
        ref = np.zeros(256)
        ref[200] = 1.0
        assert losses.histogram_loss(Tensor(lum), ref).item() == pytest.approx(2.0)

    def test_range(self, rng):
        lum = rng.uniform(0, 1, (8, 8))
        ref = hard_histogram(rng.uniform(0, 1, (8, 8)))
        assert 0.0 <= losses.histogram_loss(Tensor(lum), ref).item() <= 2.0

    def test_gradient(self, rng):
        lum = rng.uniform(0.1, 0.9, (5, 5))
        ref = hard_histogram(rng.uniform(0, 1, (9, 9)))
        t = Tensor(lum, requires_grad=True)
        losses.histogram_loss(t, ref, bandwidth=4.0).backward()
        g = finite_diff(
            lambda v: losses.histogram_loss(Tensor(v), ref, bandwidth=4.0).item(),
            lum, h=1e-6)
        assert rel_err(t.grad, g) < TOL

    def test_unnormalized_reference_rejected(self, rng):
        with pytest.raises(ValueError):
            losses.histogram_loss(Tensor(rng.uniform(0, 1, (4, 4))), np.ones(256))


class TestGramLoss:
    def test_identical_is_zero(self, rng):
        r = rng.uniform(0, 1, (6, 6, 3))
        assert losses.gram_loss(r, Tensor(chw(r))).item() == pytest.approx(0.0)

    def test_pixel_permutation_invariant(self, rng):
        r = rng.uniform(0, 1, (6, 6, 3))
        flat = r.reshape(-1, 3)
        perm = flat[rng.permutation(len(flat))].reshape(r.shape)
        assert losses.gram_loss(r, Tensor(chw(perm))).item() == pytest.approx(0.0)

    def test_hand_value(self):
        ones = np.ones((3, 4))
        zeros = Tensor(np.zeros((3, 4)))
        # gram(ones)/P is all-ones 3x3; gram(zeros) is zero: sum |1-0| = 9
        assert losses.gram_loss(ones, zeros).item() == pytest.approx(9.0)

    def test_resolution_independent(self, rng):
        r = np.tile(rng.uniform(0, 1, (1, 4, 3)), (4, 1, 1))
        small = losses.gram_loss(r, Tensor(np.zeros((3, 4, 4))))
        big = losses.gram_loss(np.tile(r, (2, 2, 1)), Tensor(np.zeros((3, 8, 8))))
        assert small.item() == pytest.approx(big.item())

    def test_gradient(self, rng):
        ref = rng.uniform(0, 1, (5, 5, 3))
        en = rng.uniform(0.1, 0.9, (3, 5, 5))
        t = Tensor(en, requires_grad=True)
        losses.gram_loss(ref, t).backward()
        g = finite_diff(lambda v: losses.gram_loss(ref, Tensor(v)).item(), en)
        assert rel_err(t.grad, g) < TOL

    def test_channel_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            losses.gram_loss(rng.uniform(0, 1, (4, 4)), Tensor(np.zeros((3, 4, 4))))


class TestChromaticityLoss:
    def test_identical_within_relaxation_gap(self, rng):
        r = rng.uniform(0.05, 1.0, (8, 8, 3))
        loss = losses.chromaticity_loss(r, Tensor(chw(r))).item()
        assert 0.0 <= loss <= 0.05

    def test_same_hue_disjoint_saturation(self):
        # same hue everywhere; saturations far apart -> hue term ~0, sat term ~2
        base = np.zeros((8, 8, 3))
        base[:, :, 0] = 1.0          # saturated red
        washed = np.full((8, 8, 3), 0.9)
        washed[:, :, 0] = 1.0        # barely saturated red
        loss = losses.chromaticity_loss(base, Tensor(chw(washed))).item()
        assert loss == pytest.approx(2.0, abs=0.1)

    def test_bounded(self, rng):
        a = rng.uniform(0, 1, (6, 6, 3))
        b = rng.uniform(0, 1, (3, 6, 6))
        assert 0.0 <= losses.chromaticity_loss(a, Tensor(b)).item() <= 4.0

    def test_gradient(self, rng):
        ref = rng.uniform(0, 1, (4, 4, 3))
        en = rng.uniform(0.15, 0.85, (3, 4, 4))
        t = Tensor(en, requires_grad=True)
        losses.chromaticity_loss(ref, t).backward()
        g = finite_diff(lambda v: losses.chromaticity_loss(ref, Tensor(v)).item(),
                        en, h=1e-6)
        assert rel_err(t.grad, g) < TOL


class TestSpatialLoss:
    def test_identical_is_zero(self, rng):
        r = rng.uniform(0, 1, (8, 8, 3))
        assert losses.spatial_loss(r, Tensor(chw(r))).item() == pytest.approx(0.0)

    def test_constant_offset_invariance(self, rng):
        r = rng.uniform(0.2, 0.7, (8, 8, 3))
        shifted = np.clip(r + 0.1, 0, 1)
        assert losses.spatial_loss(r, Tensor(chw(shifted))).item() == pytest.approx(
            0.0, abs=1e-12)

    def test_ramp_vs_constant_oracle(self):
        h = w = 16
        ramp = np.tile(np.arange(w) / (w - 1), (h, 1))[:, :, None] * np.ones(3)
        const = Tensor(np.zeros((3, h, w)))
        # pooled ramp has slope 4/(w-1) per pooled step; x-gradient field of
        # the (4x4)-pooled map has 3 valid columns, y-gradient is zero
        pooled_slope = 4 / (w - 1)
        expected = pooled_slope ** 2
        got = losses.spatial_loss(ramp, const).item()
        assert got == pytest.approx(expected, rel=1e-9)

    def test_small_image_rejected(self, rng):
        with pytest.raises(ValueError):
            losses.spatial_loss(rng.uniform(0, 1, (6, 6, 3)),
                                Tensor(np.zeros((3, 6, 6))))

    def test_gradient(self, rng):
        low = rng.uniform(0, 1, (8, 8, 3))
        en = rng.uniform(0.1, 0.9, (3, 8, 8))
        t = Tensor(en, requires_grad=True)
        losses.spatial_loss(low, t).backward()
        g = finite_diff(lambda v: losses.spatial_loss(low, Tensor(v)).item(), en)
        assert rel_err(t.grad, g) < TOL


class TestPerceptualLoss:
    def test_identical_is_zero(self, rng, extractor):
        r = rng.uniform(0, 1, (8, 8, 3))
        assert losses.perceptual_loss(r, Tensor(chw(r)), extractor).item() == 0.0

    def test_symmetry(self, rng, extractor):
        a = rng.uniform(0, 1, (8, 8, 3))
        b = rng.uniform(0, 1, (8, 8, 3))
        ab = losses.perceptual_loss(a, Tensor(chw(b)), extractor).item()
        ba = losses.perceptual_loss(b, Tensor(chw(a)), extractor).item()
        assert ab == pytest.approx(ba)

    def test_gradient(self, rng, extractor):
        low = rng.uniform(0, 1, (8, 8, 3))
        en = rng.uniform(0.1, 0.9, (3, 8, 8))
        t = Tensor(en, requires_grad=True)
        losses.perceptual_loss(low, t, extractor).backward()
        g = finite_diff(
            lambda v: losses.perceptual_loss(low, Tensor(v), extractor).item(), en)
        assert rel_err(t.grad, g) < TOL


class TestTotalLoss:
    def test_all_zero(self):
        zero = Tensor(0.0)
        tot, rep = losses.total_loss(zero, zero, zero, zero, zero)
        assert tot.item() == 0.0 and rep.total == 0.0

    def test_paper_weights_arithmetic(self):
        one = Tensor(1.0)
        tot, rep = losses.total_loss(one, one, one, one, one)
        assert tot.item() == pytest.approx(1.0411)
        assert rep.total == pytest.approx(rep.his + 0.0001 * rep.gram
                                          + 0.01 * rep.chr + 0.03 * rep.spa
                                          + 0.001 * rep.per, abs=1e-9)

    def test_linear_in_each_component(self, rng):
        vals = rng.uniform(0.1, 2.0, 5)
        w = losses.LossWeights()
        base, _ = losses.total_loss(*(Tensor(v) for v in vals), w)
        weights = (1.0, w.w1, w.w2, w.w3, w.w4)
        for i, wi in enumerate(weights):
            bumped = vals.copy()
            bumped[i] += 0.25
            tot, _ = losses.total_loss(*(Tensor(v) for v in bumped), w)
            assert tot.item() - base.item() == pytest.approx(wi * 0.25, abs=1e-12)

    def test_hsv_ablation_weights(self):
        w = losses.LossWeights(w2=0.0)
        one = Tensor(1.0)
        tot, _ = losses.total_loss(one, one, one, one, one, w)
        assert tot.item() == pytest.approx(1.0411 - 0.01)

    def test_nan_component_aborts_with_name(self):
        with pytest.raises(FloatingPointError, match="chr"):
            losses.total_loss(Tensor(0.0), Tensor(0.0), Tensor(float("nan")),
                              Tensor(0.0), Tensor(0.0))
