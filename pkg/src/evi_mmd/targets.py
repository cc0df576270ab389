"""Built-in target distributions with densities, gradients, and exact samplers.

The three 2-d toys (a star-shaped five-component mixture, an eight-component
ring mixture, and a wave-shaped density) plus an isotropic Gaussian of any
dimension.  Densities and gradients are batched: (n, d) in, (n,) / (n, d) out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidArgumentError
from .model import DensityTarget, _frozen_array

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of K Gaussians with full covariances.

    Validates that the weights form a probability vector and every covariance
    is symmetric positive definite; precomputed inverses, Cholesky factors,
    and normalizing constants make batched evaluation cheap.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray

    def __post_init__(self):
        w = _frozen_array(self.weights, "weights", ndim=1)
        mu = _frozen_array(self.means, "means", ndim=2)
        cov = np.array(self.covariances, dtype=float)
        if cov.ndim != 3:
            raise InvalidArgumentError(f"covariances must be K x d x d, got {cov.shape}")
        k, d = mu.shape
        if w.shape[0] != k or cov.shape != (k, d, d):
            raise InvalidArgumentError(
                f"inconsistent component shapes: weights {w.shape}, means {mu.shape}, "
                f"covariances {cov.shape}"
            )
        if np.any(w < 0) or abs(float(w.sum()) - 1.0) > _WEIGHT_TOL:
            raise InvalidArgumentError(
                f"weights must be non-negative and sum to 1, got sum {float(w.sum())!r}"
            )
        if not np.allclose(cov, np.swapaxes(cov, 1, 2), rtol=0, atol=1e-12):
            raise InvalidArgumentError("covariances must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise InvalidArgumentError("covariances must be positive definite") from exc
        cov.setflags(write=False)
        object.__setattr__(self, "covariances", cov)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        # Cached factors; dataclass is frozen so attach via object.__setattr__.
        inv = np.linalg.inv(cov)
        dets = np.prod(np.einsum("kii->ki", chol), axis=1) ** 2
        norm = w / ((2.0 * np.pi) ** (d / 2.0) * np.sqrt(dets))
        object.__setattr__(self, "_chol", chol)
        object.__setattr__(self, "_inv", inv)
        object.__setattr__(self, "_norm", norm)

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def _accumulate(self, x: np.ndarray, with_grad: bool) -> Tuple[np.ndarray, np.ndarray]:
        # Loop over the few components rather than broadcasting across them:
        # the (n, K, d, d) einsum path is several times slower on large probe
        # batches, which dominate the solver's hot loop.
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = x.shape[0]
        dens = np.zeros(n)
        grad = np.zeros_like(x) if with_grad else None
        for k in range(self.n_components):
            diff = x - self.means[k]
            pulled = np.einsum("nd,de->ne", diff, self._inv[k])
            quad = np.einsum("nd,nd->n", diff, pulled)
            comp = self._norm[k] * np.exp(-0.5 * quad)
            dens += comp
            if with_grad:
                grad -= comp[:, None] * pulled
        return dens, grad

    def density(self, x: np.ndarray) -> np.ndarray:
        dens, _ = self._accumulate(x, with_grad=False)
        return dens

    def grad_density(self, x: np.ndarray) -> np.ndarray:
        _, grad = self._accumulate(x, with_grad=True)
        return grad

    def density_and_grad(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self._accumulate(x, with_grad=True)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return mixture_sampler(self, n, rng)


def mixture_sampler(target: GaussianMixture, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws: categorical component choice, then a Cholesky transform
    of standard normals.  Deterministic given the generator state."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"sample count must be >= 1, got {n!r}")
    comp = rng.choice(target.n_components, size=int(n), p=target.weights)
    z = rng.standard_normal((int(n), target.dim))
    return target.means[comp] + np.einsum("nde,ne->nd", target._chol[comp], z)


def _target_from_mixture(mixture: GaussianMixture, box: Tuple[float, float]) -> DensityTarget:
    lower = np.full(mixture.dim, box[0], dtype=float)
    upper = np.full(mixture.dim, box[1], dtype=float)
    return DensityTarget(
        density=mixture.density,
        grad_density=mixture.grad_density,
        domain_box=(lower, upper),
        exact_sampler=mixture.sample,
        density_and_grad=mixture.density_and_grad,
    )


def star_mixture() -> DensityTarget:
    """Five-armed star: equally weighted Gaussians whose means and elongated
    covariances are successive rotations (by 2*pi/5) of (1.5, 0) and
    diag(1, 0.01).  Initialization box [-2, 2]^2."""
    theta = 2.0 * np.pi / 5.0
    rot = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    base_mean = np.array([1.5, 0.0])
    base_cov = np.diag([1.0, 0.01])
    means, covs = [], []
    r_pow = np.eye(2)
    for _ in range(5):
        means.append(r_pow @ base_mean)
        covs.append(r_pow @ base_cov @ r_pow.T)
        r_pow = rot @ r_pow
    mixture = GaussianMixture(
        weights=np.full(5, 0.2), means=np.array(means), covariances=np.array(covs)
    )
    return _target_from_mixture(mixture, (-2.0, 2.0))


EIGHT_MIXTURE_MEANS = np.array(
    [
        (0.0, 4.0),
        (2.8, 2.8),
        (4.0, 0.0),
        (-2.8, 2.8),
        (-4.0, 0.0),
        (-2.8, -2.8),
        (0.0, -4.0),
        (2.8, -2.8),
    ]
)


def eight_mixture() -> DensityTarget:
    """Eight equally weighted Gaussians on a ring of radius ~4 with shared
    covariance 0.2 * I.  Initialization box [-4, 4]^2."""
    covs = np.repeat(0.2 * np.eye(2)[None, :, :], 8, axis=0)
    mixture = GaussianMixture(
        weights=np.full(8, 0.125), means=EIGHT_MIXTURE_MEANS, covariances=covs
    )
    return _target_from_mixture(mixture, (-4.0, 4.0))


_WAVE_CONST = 9.93  # literal normalizer; the exact value is pi * sqrt(10)


def _wave_density(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = x[:, 0], x[:, 1]
    return np.exp(-0.1 * x1**2 - (x2 - np.sin(np.pi * x1)) ** 2) / _WAVE_CONST


def _wave_grad(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x1, x2 = x[:, 0], x[:, 1]
    rho = _wave_density(x)
    resid = x2 - np.sin(np.pi * x1)
    g1 = rho * (-0.2 * x1 + 2.0 * np.pi * np.cos(np.pi * x1) * resid)
    g2 = rho * (-2.0 * resid)
    return np.stack([g1, g2], axis=1)


def _wave_density_and_grad(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return _wave_density(x), _wave_grad(x)


def _wave_sampler(rng: np.random.Generator, n: int) -> np.ndarray:
    # The density factorizes as N(x1; 0, 5) * N(x2; sin(pi x1), 1/2) up to
    # the rounded normalizer, so exact sampling is a two-stage draw.
    x1 = rng.normal(0.0, np.sqrt(5.0), size=int(n))
    x2 = np.sin(np.pi * x1) + rng.normal(0.0, np.sqrt(0.5), size=int(n))
    return np.stack([x1, x2], axis=1)


def wave_density() -> DensityTarget:
    """Wave-shaped density 9.93^-1 exp(-0.1 x1^2 - (x2 - sin(pi x1))^2) on
    initialization box [-3, 3]^2.  The literal 9.93 normalizer is kept; it is
    ~0.05% away from the exact constant, which the discrepancy estimators
    absorb as a scale factor."""
    lower = np.full(2, -3.0)
    upper = np.full(2, 3.0)
    return DensityTarget(
        density=_wave_density,
        grad_density=_wave_grad,
        domain_box=(lower, upper),
        exact_sampler=_wave_sampler,
        density_and_grad=_wave_density_and_grad,
    )


def isotropic_gaussian(d: int, sigma: float = 1.0) -> DensityTarget:
    """N(0, sigma^2 I_d) with exact sampler; initialization box [-2, 2]^d."""
    if int(d) != d or d < 1:
        raise InvalidArgumentError(f"dimension must be a positive integer, got {d!r}")
    sigma = float(sigma)
    if not np.isfinite(sigma) or sigma <= 0:
        raise InvalidArgumentError(f"sigma must be > 0, got {sigma!r}")
    d = int(d)
    mixture = GaussianMixture(
        weights=np.ones(1),
        means=np.zeros((1, d)),
        covariances=(sigma**2 * np.eye(d))[None, :, :],
    )
    lower = np.full(d, -2.0)
    upper = np.full(d, 2.0)
    return DensityTarget(
        density=mixture.density,
        grad_density=mixture.grad_density,
        domain_box=(lower, upper),
        exact_sampler=mixture.sample,
        density_and_grad=mixture.density_and_grad,
    )
