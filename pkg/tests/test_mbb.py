import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blockpick.exceptions import BlockLengthError
from blockpick.mbb import (
    block_means,
    mbb_variance,
    mbb_variance_general,
    mbb_variance_mean_exact,
    mean_variance_curve,
)
from blockpick.statistic import builtin_statistic

from oracles import enumerate_mbb_variance

MEAN = builtin_statistic("mean")


class TestBlockMeans:
    def test_pairs(self):
        np.testing.assert_allclose(block_means([1, 2, 3, 4], 2)[:, 0], [1.5, 2.5, 3.5])

    def test_unit_block(self):
        np.testing.assert_allclose(block_means([1, 2, 3, 4], 1)[:, 0], [1, 2, 3, 4])

    def test_single_block(self):
        np.testing.assert_allclose(block_means([1, 2, 3, 4], 3)[:, 0], [2.0, 3.0])

    def test_too_long(self):
        with pytest.raises(BlockLengthError):
            block_means([1, 2, 3, 4], 4)

    def test_multivariate_matches_direct(self):
        x = np.random.default_rng(0).normal(size=(40, 2))
        direct = np.array([x[i:i + 7].mean(axis=0) for i in range(34)])
        np.testing.assert_allclose(block_means(x, 7), direct, atol=1e-12)


class TestExact:
    def test_constant(self):
        for ell in (1, 2, 5):
            assert mbb_variance_mean_exact(np.full(10, 3.7), ell).value == 0.0

    def test_small_examples(self):
        assert mbb_variance_mean_exact([1, 2, 3, 4], 2).value == pytest.approx(4 / 3, abs=1e-14)
        assert mbb_variance_mean_exact([1, 2, 3, 4], 1).value == pytest.approx(1.25, abs=1e-14)

    @pytest.mark.parametrize("n", range(2, 8))
    def test_matches_enumeration(self, n):
        rng = np.random.default_rng(n)
        for _ in range(5):
            x = rng.integers(-5, 6, n)
            for ell in range(1, min(3, n - 1) + 1):
                want = float(enumerate_mbb_variance(list(x), ell))
                assert mbb_variance_mean_exact(x, ell).value == pytest.approx(want, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=6, max_size=40), st.floats(-1e3, 1e3), st.integers(1, 4))
    def test_location_invariance(self, xs, shift, ell):
        x = np.asarray(xs)
        a = mbb_variance_mean_exact(x, ell).value
        b = mbb_variance_mean_exact(x + shift, ell).value
        assert b == pytest.approx(a, abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-50, 50), min_size=6, max_size=40), st.floats(0.01, 100), st.integers(1, 4))
    def test_scale_equivariance(self, xs, c, ell):
        x = np.asarray(xs)
        a = mbb_variance_mean_exact(x, ell).value
        assert mbb_variance_mean_exact(c * x, ell).value == pytest.approx(c * c * a, rel=1e-9, abs=1e-9)

    def test_batch_curve_matches_scalar(self):
        x = np.random.default_rng(3).normal(size=(4, 60))
        curve = mean_variance_curve(x, [1, 3, 9])
        for r in range(4):
            for j, ell in enumerate([1, 3, 9]):
                assert curve[r, j] == pytest.approx(mbb_variance_mean_exact(x[r], ell).value, rel=1e-12)


class TestMonteCarlo:
    def test_converges_to_exact_small(self):
        est = mbb_variance_general([1, 2, 3, 4], 2, MEAN, 100_000, seed=5)
        assert abs(est.value - 4 / 3) < 3 * est.monte_carlo_se
        assert est.n_boot_samples == 100_000

    def test_consistency_random_cases(self):
        rng = np.random.default_rng(17)
        for case in range(20):
            n = int(rng.integers(8, 60))
            ell = int(rng.integers(1, max(2, n // 3)))
            x = rng.normal(size=n)
            exact = mbb_variance_mean_exact(x, ell).value
            mc = mbb_variance_general(x, ell, MEAN, 10_000, seed=case)
            assert abs(mc.value - exact) < 4 * mc.monte_carlo_se

    @pytest.mark.parametrize("name", ["mean", "ratio", "coordinate_product"])
    def test_constant_series(self, name):
        H = builtin_statistic(name)
        x = np.full((12, H.dim), 2.5)
        assert mbb_variance_general(x, 3, H, 50, seed=1).value == 0.0

    def test_deterministic(self):
        x = np.random.default_rng(1).normal(1.0, 1.0, size=(30, 2))
        H = builtin_statistic("coordinate_product")
        a = mbb_variance_general(x, 4, H, 200, seed=9)
        b = mbb_variance_general(x, 4, H, 200, seed=9)
        assert a.value == b.value

    def test_needs_two_replicates(self):
        with pytest.raises(ValueError):
            mbb_variance_general([1.0, 2.0, 3.0], 1, MEAN, 1, seed=0)

    def test_block_too_long(self):
        with pytest.raises(BlockLengthError):
            mbb_variance_general([1.0, 2.0, 3.0], 3, MEAN, 10, seed=0)


class TestDispatch:
    def test_mean_goes_exact(self):
        x = np.random.default_rng(2).normal(size=25)
        assert mbb_variance(x, 3, MEAN).value == mbb_variance_mean_exact(x, 3).value
        assert mbb_variance(x, 3, MEAN).n_boot_samples == 0

    def test_nonlinear_goes_monte_carlo(self):
        x = np.random.default_rng(2).normal(2.0, 1.0, size=(25, 2))
        H = builtin_statistic("ratio")
        assert mbb_variance(x, 3, H, 300, seed=4).value == mbb_variance_general(x, 3, H, 300, seed=4).value
