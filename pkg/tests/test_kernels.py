import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evi_mmd import InvalidArgumentError, KernelConfig
from evi_mmd.kernels import (
    cross_gram,
    gauss_eval,
    gauss_grad_x,
    gram,
    neg_euclid_eval,
    pairwise_distances,
)

coords = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


def vectors(dim):
    return arrays(float, (dim,), elements=coords)


def finite_diff_grad(f, x, step=1e-5):
    """Central-difference gradient, the independent oracle for analytic grads."""
    g = np.zeros_like(x, dtype=float)
    for i in range(x.size):
        e = np.zeros_like(x, dtype=float)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


class TestGaussEval:
    def test_identity_case(self):
        assert gauss_eval([0.3, -1.2], [0.3, -1.2], 1.0) == 1.0

    def test_hand_value_1d(self):
        assert gauss_eval([0.0], [1.0], 1.0) == pytest.approx(np.exp(-0.5), rel=1e-12)

    @pytest.mark.parametrize("h", [0.3, 1.0, 2.5])
    def test_distance_h_sqrt2_gives_exp_minus_one(self, h):
        x = np.zeros(2)
        y = np.array([h * np.sqrt(2.0), 0.0])
        assert gauss_eval(x, y, h) == pytest.approx(np.exp(-1.0), rel=1e-12)

    @pytest.mark.parametrize("bad_h", [0.0, -1.0, np.nan])
    def test_rejects_bad_bandwidth(self, bad_h):
        with pytest.raises(InvalidArgumentError):
            gauss_eval([0.0], [1.0], bad_h)

    def test_rejects_non_finite_input(self):
        with pytest.raises(InvalidArgumentError):
            gauss_eval([np.inf], [1.0], 1.0)

    @given(st.data())
    def test_in_unit_interval_and_symmetric(self, data):
        d = data.draw(st.integers(1, 4))
        x = data.draw(vectors(d))
        y = data.draw(vectors(d))
        h = data.draw(st.floats(min_value=0.05, max_value=5.0))
        v = gauss_eval(x, y, h)
        assert 0.0 <= v <= 1.0
        if np.sum((x - y) ** 2) / (2 * h * h) < 700:  # exp not underflowed
            assert v > 0.0
        assert v == gauss_eval(y, x, h)


class TestGaussGrad:
    def test_zero_at_coincident_points(self):
        g = gauss_grad_x([1.0, 2.0], [1.0, 2.0], 0.7)
        assert np.all(g == 0.0)

    def test_hand_value_1d(self):
        g = gauss_grad_x([1.0], [0.0], 1.0)
        assert g[0] == pytest.approx(-np.exp(-0.5), rel=1e-12)

    def test_antisymmetry(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            x, y = rng.normal(size=(2, 3))
            h = rng.uniform(0.2, 3.0)
            np.testing.assert_allclose(
                gauss_grad_x(x, y, h), -gauss_grad_x(y, x, h), rtol=0, atol=0
            )

    def test_matches_finite_differences_at_100_probes(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            d = rng.integers(1, 5)
            x = rng.normal(size=d)
            y = rng.normal(size=d)
            h = rng.uniform(0.3, 3.0)
            analytic = gauss_grad_x(x, y, h)
            numeric = finite_diff_grad(lambda z: gauss_eval(z, y, h), x)
            np.testing.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-9)


class TestNegEuclid:
    def test_identity_case(self):
        assert neg_euclid_eval([2.0, 2.0], [2.0, 2.0]) == 0.0

    def test_direct_norm_1d(self):
        assert neg_euclid_eval([0.0], [3.0]) == -3.0

    def test_three_four_five(self):
        assert neg_euclid_eval([0.0, 0.0], [3.0, 4.0]) == pytest.approx(-5.0, rel=1e-15)

    @given(st.data())
    def test_non_positive(self, data):
        d = data.draw(st.integers(1, 4))
        x = data.draw(vectors(d))
        y = data.draw(vectors(d))
        assert neg_euclid_eval(x, y) <= 0.0


class TestGramMatrices:
    def test_single_point_gaussian(self):
        np.testing.assert_array_equal(
            gram(np.zeros((1, 3)), KernelConfig.gaussian(1.0)), [[1.0]]
        )

    def test_two_identical_points(self):
        pts = np.array([[0.5, -0.5], [0.5, -0.5]])
        np.testing.assert_array_equal(
            gram(pts, KernelConfig.gaussian(2.0)), np.ones((2, 2))
        )

    @pytest.mark.parametrize(
        "kernel",
        [KernelConfig.gaussian(0.8), KernelConfig.negative_euclidean()],
        ids=["gaussian", "negative_euclidean"],
    )
    def test_matches_entrywise_loop_oracle(self, kernel):
        rng = np.random.default_rng(11)
        pts = rng.normal(size=(3, 2))
        got = gram(pts, kernel)
        for i in range(3):
            for j in range(3):
                if kernel.is_gaussian:
                    expect = gauss_eval(pts[i], pts[j], kernel.bandwidth)
                else:
                    expect = neg_euclid_eval(pts[i], pts[j])
                assert got[i, j] == pytest.approx(expect, rel=1e-14, abs=1e-15)

    def test_exact_symmetry_and_unit_diagonal(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(40, 3))
        k = gram(pts, KernelConfig.gaussian(1.3))
        assert np.array_equal(k, k.T)
        assert np.all(np.diag(k) == 1.0)
        assert np.all((k > 0.0) & (k <= 1.0))

    def test_cross_gram_on_same_set_equals_gram_off_diagonal(self):
        rng = np.random.default_rng(9)
        pts = rng.normal(size=(6, 2))
        kernel = KernelConfig.gaussian(1.0)
        full = gram(pts, kernel)
        cross = cross_gram(pts, pts, kernel)
        np.testing.assert_allclose(cross, full, rtol=0, atol=1e-15)

    def test_cross_gram_single_pair(self):
        a = np.array([[1.0, 0.0]])
        b = np.array([[0.0, 0.0]])
        kernel = KernelConfig.gaussian(1.0)
        got = cross_gram(a, b, kernel)
        assert got.shape == (1, 1)
        assert got[0, 0] == pytest.approx(gauss_eval(a[0], b[0], 1.0), rel=1e-15)

    def test_cross_gram_matches_loop_oracle(self):
        rng = np.random.default_rng(21)
        a = rng.normal(size=(2, 3))
        b = rng.normal(size=(3, 3))
        kernel = KernelConfig.gaussian(0.6)
        got = cross_gram(a, b, kernel)
        for i in range(2):
            for j in range(3):
                assert got[i, j] == pytest.approx(
                    gauss_eval(a[i], b[j], 0.6), rel=1e-14
                )

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            cross_gram(np.zeros((2, 2)), np.zeros((2, 3)), KernelConfig.gaussian(1.0))

    def test_chunking_boundary_consistency(self):
        # exercise the >256-row chunked path against the small-path result
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(300, 2))
        dist = pairwise_distances(pts, pts)
        sub = pairwise_distances(pts[250:], pts)
        np.testing.assert_array_equal(dist[250:], sub)
