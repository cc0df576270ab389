import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evi_mmd import (
    DensityTarget,
    EmpiricalTarget,
    InvalidArgumentError,
    KernelConfig,
    McNoise,
    UnsupportedOperationError,
    cross_term_density,
    cross_term_empirical,
    free_energy,
    gauss_eval,
    grad_free_energy,
    isotropic_gaussian,
    square_term,
)
from evi_mmd.free_energy import (
    density_closures,
    empirical_closures,
    gaussian_normalizer,
)

GAUSS1 = KernelConfig.gaussian(1.0)


def convolution_value(h, sigma, d, x_sqnorm=0.0):
    """Closed-form oracle: integral of exp(-|y-x|^2/2h^2) against N(0, sigma^2 I)
    equals (h^2/(h^2+sigma^2))^(d/2) * exp(-|x|^2 / (2(h^2+sigma^2)))."""
    s = h * h + sigma * sigma
    return (h * h / s) ** (d / 2.0) * np.exp(-x_sqnorm / (2.0 * s))


def fd_grad_matrix(f, x, step=1e-6):
    g = np.zeros_like(x)
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            e = np.zeros_like(x)
            e[i, j] = step
            g[i, j] = (f(x + e) - f(x - e)) / (2 * step)
    return g


class TestSquareTerm:
    def test_single_particle_gaussian(self):
        assert square_term(np.zeros((1, 2)), GAUSS1) == 1.0

    def test_two_identical_points(self):
        assert square_term(np.array([[1.0], [1.0]]), GAUSS1) == 1.0

    def test_two_points_at_h_sqrt2(self):
        pts = np.array([[0.0], [np.sqrt(2.0)]])
        expect = (1 + np.exp(-1.0)) / 2
        assert square_term(pts, GAUSS1) == pytest.approx(expect, rel=1e-14)


class TestCrossTermDensity:
    def test_zero_density_gives_zero(self):
        target = DensityTarget(
            density=lambda x: np.zeros(len(x)),
            grad_density=lambda x: np.zeros_like(x),
            domain_box=(np.zeros(2), np.ones(2)),
        )
        noise = McNoise.draw(np.random.default_rng(0), 50, 2)
        assert cross_term_density(np.zeros((3, 2)), target, 1.0, noise) == 0.0

    def test_converges_to_closed_form_1d(self):
        # single particle at 0, h=1, target N(0,1): limit is 1/sqrt(2)
        target = isotropic_gaussian(1, 1.0)
        noise = McNoise.draw(np.random.default_rng(5), 100_000, 1)
        got = cross_term_density(np.zeros((1, 1)), target, 1.0, noise)
        assert got == pytest.approx(1 / np.sqrt(2.0), rel=0.02)

    def test_monte_carlo_error_decreases_with_l(self):
        target = isotropic_gaussian(2, 1.0)
        exact = convolution_value(1.0, 1.0, 2)
        assert exact == 0.5
        rng = np.random.default_rng(11)
        errors = []
        for L in (10**2, 10**4, 10**6):
            noise = McNoise.draw(rng, L, 2)
            got = cross_term_density(np.zeros((1, 2)), target, 1.0, noise)
            errors.append(abs(got - exact) / exact)
        assert errors[0] > errors[1] > errors[2]

    def test_rejects_dimension_mismatch(self):
        target = isotropic_gaussian(2, 1.0)
        noise = McNoise.draw(np.random.default_rng(0), 10, 3)
        with pytest.raises(InvalidArgumentError):
            cross_term_density(np.zeros((1, 2)), target, 1.0, noise)


class TestCrossTermEmpirical:
    def test_single_matching_point(self):
        x = np.array([[0.5, 0.5]])
        assert cross_term_empirical(x, x, GAUSS1) == 1.0

    def test_two_identical_batch_copies(self):
        x = np.array([[0.2, -0.2]])
        batch = np.vstack([x, x])
        assert cross_term_empirical(x, batch, GAUSS1) == pytest.approx(1.0, rel=1e-15)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(2, 2))
        batch = rng.normal(size=(3, 2))
        expect = sum(
            gauss_eval(x[i], batch[j], 1.0) for i in range(2) for j in range(3)
        ) / 3
        assert cross_term_empirical(x, batch, GAUSS1) == pytest.approx(expect, rel=1e-13)

    def test_empty_batch_rejected(self):
        with pytest.raises(InvalidArgumentError):
            cross_term_empirical(np.zeros((1, 2)), np.zeros((0, 2)), GAUSS1)


class TestFreeEnergy:
    def test_single_point_two_sample_value(self):
        x = np.array([[1.0, 2.0]])
        target = EmpiricalTarget(x, minibatch_size=1)
        assert free_energy(x, target, GAUSS1) == pytest.approx(-1.0, rel=1e-15)

    def test_zero_density_leaves_square_term(self):
        target = DensityTarget(
            density=lambda x: np.zeros(len(x)),
            grad_density=lambda x: np.zeros_like(x),
            domain_box=(np.zeros(1), np.ones(1)),
        )
        noise = McNoise.draw(np.random.default_rng(0), 20, 1)
        pts = np.array([[0.0], [1.0]])
        assert free_energy(pts, target, GAUSS1, noise=noise) == square_term(pts, GAUSS1)

    def test_particles_equal_batch_gives_minus_mean_gram(self):
        rng = np.random.default_rng(9)
        pts = rng.normal(size=(3, 2))
        target = EmpiricalTarget(pts, minibatch_size=3)
        from evi_mmd import gram

        mean_gram = gram(pts, GAUSS1).mean()
        got = free_energy(pts, target, GAUSS1, batch=pts)
        assert got == pytest.approx(-mean_gram, rel=1e-13)

    def test_density_branch_rejects_energy_kernel(self):
        target = isotropic_gaussian(1, 1.0)
        noise = McNoise.draw(np.random.default_rng(0), 10, 1)
        with pytest.raises(UnsupportedOperationError):
            free_energy(
                np.zeros((1, 1)), target, KernelConfig.negative_euclidean(), noise=noise
            )

    def test_determinism_with_frozen_noise(self):
        target = isotropic_gaussian(2, 1.0)
        noise = McNoise.draw(np.random.default_rng(1), 100, 2)
        pts = np.random.default_rng(2).normal(size=(5, 2))
        a = free_energy(pts, target, GAUSS1, noise=noise)
        b = free_energy(pts, target, GAUSS1, noise=noise)
        assert a == b
        ga = grad_free_energy(pts, target, GAUSS1, noise=noise)
        gb = grad_free_energy(pts, target, GAUSS1, noise=noise)
        np.testing.assert_array_equal(ga, gb)

    @given(
        shift=arrays(
            float,
            (2,),
            elements=st.floats(min_value=-20, max_value=20, allow_nan=False),
        )
    )
    @settings(max_examples=25, deadline=None)
    def test_translation_covariance_empirical(self, shift):
        rng = np.random.default_rng(12)
        pts = rng.normal(size=(4, 2))
        batch = rng.normal(size=(6, 2))
        target = EmpiricalTarget(batch, minibatch_size=6)
        base = free_energy(pts, target, GAUSS1, batch=batch)
        target2 = EmpiricalTarget(batch + shift, minibatch_size=6)
        moved = free_energy(pts + shift, target2, GAUSS1, batch=batch + shift)
        assert moved == pytest.approx(base, abs=1e-12)

    def test_perfect_match_beats_perturbations(self):
        rng = np.random.default_rng(21)
        batch = rng.normal(size=(4, 2))
        target = EmpiricalTarget(batch, minibatch_size=4)
        matched = free_energy(batch, target, GAUSS1, batch=batch)
        for k in range(30):
            perm = rng.permutation(4)
            perturbed = batch[perm] + rng.normal(scale=0.3, size=(4, 2))
            assert matched <= free_energy(perturbed, target, GAUSS1, batch=batch)


class TestGradients:
    def test_single_particle_square_term_gradient_vanishes(self):
        # self-interaction only: the square term contributes no gradient
        target = DensityTarget(
            density=lambda x: np.zeros(len(x)),
            grad_density=lambda x: np.zeros_like(x),
            domain_box=(np.zeros(2) - 1, np.ones(2)),
        )
        noise = McNoise.draw(np.random.default_rng(0), 10, 2)
        g = grad_free_energy(np.array([[0.4, -0.7]]), target, GAUSS1, noise=noise)
        np.testing.assert_array_equal(g, 0.0)

    @pytest.mark.parametrize("kernel", [GAUSS1, KernelConfig.negative_euclidean()])
    def test_empirical_gradient_matches_finite_differences(self, kernel):
        rng = np.random.default_rng(31)
        for trial in range(20):
            pts = rng.normal(size=(3, 2))
            batch = rng.normal(size=(4, 2))
            target = EmpiricalTarget(batch, minibatch_size=4)
            analytic = grad_free_energy(pts, target, kernel, batch=batch)
            numeric = fd_grad_matrix(
                lambda x: free_energy(x, target, kernel, batch=batch), pts
            )
            scale = max(np.max(np.abs(analytic)), 1e-8)
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-5

    def test_density_gradient_matches_finite_differences(self):
        target = isotropic_gaussian(2, 1.0)
        rng = np.random.default_rng(17)
        for trial in range(20):
            pts = rng.normal(size=(3, 2))
            noise = McNoise.draw(rng, 64, 2)
            h = rng.uniform(0.5, 2.0)
            kernel = KernelConfig.gaussian(h)
            analytic = grad_free_energy(pts, target, kernel, noise=noise)
            numeric = fd_grad_matrix(
                lambda x: free_energy(x, target, kernel, noise=noise), pts
            )
            scale = max(np.max(np.abs(analytic)), 1e-8)
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-5

    def test_empirical_gradient_matches_brute_force_loop(self):
        from evi_mmd import gauss_grad_x

        rng = np.random.default_rng(41)
        pts = rng.normal(size=(3, 2))
        target = EmpiricalTarget(pts, minibatch_size=3)
        n = 3
        expect = np.zeros_like(pts)
        for i in range(n):
            for j in range(n):
                expect[i] += -2.0 / (n * n) * gauss_grad_x(pts[i], pts[j], 1.0)
                expect[i] += 2.0 / (n * n) * gauss_grad_x(pts[i], pts[j], 1.0)
        # cross and square cancel when particles == batch and N == L:
        # -2/(N L) sum_j dK(x_i, y_j) + 2/N^2 sum_j dK(x_i, x_j) = 0
        got = grad_free_energy(pts, target, GAUSS1, batch=pts)
        np.testing.assert_allclose(got, expect, atol=1e-12)


class TestClosures:
    def test_density_closures_match_op_functions(self):
        target = isotropic_gaussian(2, 1.0)
        noise = McNoise.draw(np.random.default_rng(2), 128, 2)
        kernel = KernelConfig.gaussian(0.8)
        pts = np.random.default_rng(3).normal(size=(6, 2))
        value_fn, vg_fn = density_closures(target, kernel, noise)
        v, g = vg_fn(pts)
        assert value_fn(pts) == pytest.approx(
            free_energy(pts, target, kernel, noise=noise), rel=1e-14
        )
        assert v == pytest.approx(free_energy(pts, target, kernel, noise=noise), rel=1e-14)
        np.testing.assert_allclose(
            g, grad_free_energy(pts, target, kernel, noise=noise), atol=1e-14
        )

    def test_empirical_closures_match_op_functions(self):
        rng = np.random.default_rng(4)
        pts = rng.normal(size=(5, 3))
        batch = rng.normal(size=(7, 3))
        target = EmpiricalTarget(batch, minibatch_size=7)
        kernel = KernelConfig.gaussian(1.2)
        value_fn, vg_fn = empirical_closures(batch, kernel)
        v, g = vg_fn(pts)
        assert v == pytest.approx(free_energy(pts, target, kernel, batch=batch), rel=1e-14)
        np.testing.assert_allclose(
            g, grad_free_energy(pts, target, kernel, batch=batch), atol=1e-14
        )


def test_gaussian_normalizer_values():
    assert gaussian_normalizer(1, 1.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-15)
    assert gaussian_normalizer(2, 0.5) == pytest.approx(2 * np.pi * 0.25, rel=1e-15)
