"""The optimization objective: squared kernel discrepancy between the particle
cloud and the target, minus its particle-independent constant.

Two target branches share the particle-particle "square term":

* density branch: the particle-target cross term is a Monte-Carlo average of
  the target density over Gaussian perturbations of each particle, using one
  noise matrix frozen for the whole run so the objective is a deterministic
  function of the particles;
* empirical branch: the cross term is a plain double sum against the current
  mini-batch of training rows.

Because the constant term is dropped, values can be negative; they differ
from the full squared discrepancy by a constant (see :mod:`evi_mmd.metrics`
for the full version used in reporting).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, UnsupportedOperationError
from .kernels import _check_matrix, gram, cross_gram, pairwise_distances, squared_distances
from .model import (
    GAUSSIAN,
    NEGATIVE_EUCLIDEAN,
    DensityTarget,
    EmpiricalTarget,
    KernelConfig,
    _frozen_array,
)


@dataclass(frozen=True)
class McNoise:
    """Frozen standard-normal draws (L, d) reused by every cross-term
    evaluation within a run."""

    xi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xi", _frozen_array(self.xi, "xi", ndim=2))

    @classmethod
    def draw(cls, rng: np.random.Generator, n_samples: int, dim: int) -> "McNoise":
        if n_samples < 1 or dim < 1:
            raise InvalidArgumentError(
                f"noise shape must be positive, got ({n_samples}, {dim})"
            )
        return cls(xi=rng.standard_normal((n_samples, dim)))

    @property
    def n_samples(self) -> int:
        return self.xi.shape[0]

    @property
    def dim(self) -> int:
        return self.xi.shape[1]


def gaussian_normalizer(dim: int, h: float) -> float:
    """Constant (2 pi)^(d/2) h^d linking the Gaussian kernel to the density
    it is proportional to."""
    return float((2.0 * np.pi) ** (dim / 2.0) * h**dim)


def square_term(particles, kernel: KernelConfig) -> float:
    """Particle-particle double sum (1/N^2) sum_ij K(x_i, x_j)."""
    particles = _check_matrix(particles, "particles")
    n = particles.shape[0]
    return float(gram(particles, kernel).sum()) / (n * n)


def _density_probes(particles: np.ndarray, h: float, noise: McNoise) -> np.ndarray:
    if noise.dim != particles.shape[1]:
        raise InvalidArgumentError(
            f"noise dimension {noise.dim} does not match particles d={particles.shape[1]}"
        )
    probes = particles[:, None, :] + h * noise.xi[None, :, :]
    return probes.reshape(-1, particles.shape[1])


def cross_term_density(
    particles, target: DensityTarget, h: float, noise: McNoise
) -> float:
    """Monte-Carlo cross term sum_i (C_h / L) sum_l rho(x_i + h xi_l)."""
    particles = _check_matrix(particles, "particles")
    h = float(h)
    if not np.isfinite(h) or h <= 0:
        raise InvalidArgumentError(f"bandwidth must be > 0, got {h!r}")
    probes = _density_probes(particles, h, noise)
    vals = np.asarray(target.density(probes), dtype=float)
    c_h = gaussian_normalizer(particles.shape[1], h)
    return c_h / noise.n_samples * float(vals.sum())


def cross_term_empirical(particles, batch, kernel: KernelConfig) -> float:
    """Data cross term (1/L) sum_i sum_j K(x_i, y_j) over the mini-batch."""
    particles = _check_matrix(particles, "particles")
    batch = np.asarray(batch, dtype=float)
    if batch.size == 0:
        raise InvalidArgumentError("mini-batch must be nonempty")
    batch = _check_matrix(batch, "batch")
    return float(cross_gram(particles, batch, kernel).sum()) / batch.shape[0]


def _require_density_kernel(kernel: KernelConfig) -> float:
    if kernel.kind != GAUSSIAN:
        raise UnsupportedOperationError(
            "density-branch cross term requires a Gaussian kernel; "
            f"got {kernel.kind!r} (the estimator samples from the kernel as a density)"
        )
    return kernel.bandwidth


def free_energy(
    particles,
    target,
    kernel: KernelConfig,
    *,
    noise: Optional[McNoise] = None,
    batch: Optional[np.ndarray] = None,
) -> float:
    """Objective value -(2/N) * cross_term + square_term for either branch.

    Density targets need ``noise`` (and a Gaussian kernel); empirical targets
    use ``batch`` when given and all training rows otherwise.
    """
    particles = _check_matrix(particles, "particles")
    n = particles.shape[0]
    if isinstance(target, DensityTarget):
        h = _require_density_kernel(kernel)
        if noise is None:
            raise InvalidArgumentError("density branch requires frozen McNoise")
        cross = cross_term_density(particles, target, h, noise)
    elif isinstance(target, EmpiricalTarget):
        rows = target.data if batch is None else batch
        cross = cross_term_empirical(particles, rows, kernel)
    else:
        raise InvalidArgumentError(f"unknown target type: {type(target).__name__}")
    return -2.0 / n * cross + square_term(particles, kernel)


def _square_term_grad(particles: np.ndarray, kernel: KernelConfig) -> np.ndarray:
    """Row i: (2/N^2) sum_j d/dx_i K(x_i, x_j)."""
    n = particles.shape[0]
    if kernel.kind == GAUSSIAN:
        w = gram(particles, kernel)
        h2 = kernel.bandwidth**2
        weighted = particles * w.sum(axis=1)[:, None] - np.einsum(
            "ij,jd->id", w, particles
        )
        return -2.0 / (n * n * h2) * weighted
    if kernel.kind == NEGATIVE_EUCLIDEAN:
        units = _unit_differences(particles, particles, zero_diagonal=True)
        return -2.0 / (n * n) * units.sum(axis=1)
    raise UnsupportedOperationError(f"unknown kernel kind {kernel.kind!r}")


def _unit_differences(a: np.ndarray, b: np.ndarray, zero_diagonal: bool) -> np.ndarray:
    """(x_i - y_j)/|x_i - y_j| with coincident pairs mapped to 0."""
    diff = a[:, None, :] - b[None, :, :]
    dist = pairwise_distances(a, b)
    safe = np.where(dist > 0.0, dist, 1.0)
    units = diff / safe[:, :, None]
    units[dist == 0.0] = 0.0
    if zero_diagonal and a.shape[0] == b.shape[0]:
        idx = np.arange(a.shape[0])
        units[idx, idx] = 0.0
    return units


def _cross_term_empirical_grad(
    particles: np.ndarray, batch: np.ndarray, kernel: KernelConfig
) -> np.ndarray:
    """Row i: sum_j d/dx_i K(x_i, y_j) / L."""
    m = batch.shape[0]
    if kernel.kind == GAUSSIAN:
        w = cross_gram(particles, batch, kernel)
        h2 = kernel.bandwidth**2
        weighted = particles * w.sum(axis=1)[:, None] - np.einsum("ij,jd->id", w, batch)
        return -weighted / (h2 * m)
    if kernel.kind == NEGATIVE_EUCLIDEAN:
        units = _unit_differences(particles, batch, zero_diagonal=False)
        return -units.sum(axis=1) / m
    raise UnsupportedOperationError(f"unknown kernel kind {kernel.kind!r}")


def grad_free_energy(
    particles,
    target,
    kernel: KernelConfig,
    *,
    noise: Optional[McNoise] = None,
    batch: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Gradient of :func:`free_energy` with respect to the particle matrix."""
    particles = _check_matrix(particles, "particles")
    n = particles.shape[0]
    if isinstance(target, DensityTarget):
        h = _require_density_kernel(kernel)
        if noise is None:
            raise InvalidArgumentError("density branch requires frozen McNoise")
        if target.grad_density is None:
            raise UnsupportedOperationError("target does not provide grad_density")
        probes = _density_probes(particles, h, noise)
        g = np.asarray(target.grad_density(probes), dtype=float)
        g = g.reshape(n, noise.n_samples, particles.shape[1]).sum(axis=1)
        c_h = gaussian_normalizer(particles.shape[1], h)
        cross_grad = c_h / noise.n_samples * g
    elif isinstance(target, EmpiricalTarget):
        rows = target.data if batch is None else np.asarray(batch, dtype=float)
        if rows.size == 0:
            raise InvalidArgumentError("mini-batch must be nonempty")
        rows = _check_matrix(rows, "batch")
        cross_grad = _cross_term_empirical_grad(particles, rows, kernel)
    else:
        raise InvalidArgumentError(f"unknown target type: {type(target).__name__}")
    return -2.0 / n * cross_grad + _square_term_grad(particles, kernel)


ValueFn = Callable[[np.ndarray], float]
ValueGradFn = Callable[[np.ndarray], Tuple[float, np.ndarray]]


def density_closures(
    target: DensityTarget, kernel: KernelConfig, noise: McNoise
) -> Tuple[ValueFn, ValueGradFn]:
    """Value and fused value+gradient closures over the particle matrix for
    the density branch.  The fused path reuses one density/gradient sweep
    over the Monte-Carlo probes."""
    h = _require_density_kernel(kernel)

    def value(x: np.ndarray) -> float:
        return free_energy(x, target, kernel, noise=noise)

    fused = target.density_and_grad

    def value_and_grad(x: np.ndarray) -> Tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        n, d = x.shape
        probes = _density_probes(x, h, noise)
        if fused is not None:
            vals, grads = fused(probes)
        else:
            vals, grads = target.density(probes), target.grad_density(probes)
        c_h = gaussian_normalizer(d, h)
        scale = c_h / noise.n_samples
        cross = scale * float(np.asarray(vals, dtype=float).sum())
        cross_grad = scale * np.asarray(grads, dtype=float).reshape(n, -1, d).sum(axis=1)
        val = -2.0 / n * cross + square_term(x, kernel)
        grad = -2.0 / n * cross_grad + _square_term_grad(x, kernel)
        return val, grad

    return value, value_and_grad


def empirical_closures(
    batch: np.ndarray, kernel: KernelConfig
) -> Tuple[ValueFn, ValueGradFn]:
    """Value and fused value+gradient closures for the empirical branch with
    one fixed mini-batch."""
    batch = _check_matrix(np.asarray(batch, dtype=float), "batch")

    def value(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        return -2.0 / n * cross_term_empirical(x, batch, kernel) + square_term(x, kernel)

    def value_and_grad(x: np.ndarray) -> Tuple[float, np.ndarray]:
        x = np.asarray(x, dtype=float)
        n = x.shape[0]
        val = -2.0 / n * cross_term_empirical(x, batch, kernel) + square_term(x, kernel)
        grad = -2.0 / n * _cross_term_empirical_grad(x, batch, kernel) + _square_term_grad(
            x, kernel
        )
        return val, grad

    return value, value_and_grad
