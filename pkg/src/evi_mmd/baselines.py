"""Comparison methods: explicit-Euler descent on the same objective, an
implicit energy-distance sampler, Stein variational gradient descent, and
unadjusted Langevin Monte Carlo.

All four emit the same per-iteration record schema as the main solver so
their evaluation curves are directly comparable.  The single-loop methods
(SVGD, Langevin) record one row per ``record_stride`` steps, matching the
convention of logging 100 of their cheap steps against one implicit outer
iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .free_energy import McNoise, density_closures, empirical_closures
from .kernels import gram, pairwise_distances
from .model import (
    BandwidthSchedule,
    DensityTarget,
    EmpiricalTarget,
    IterationRow,
    KernelConfig,
    ParticleSet,
    RunRecord,
    SolverConfig,
)
from .solver import IterationSetup, bandwidth_at, draw_minibatch, run_implicit_loop

_DENSITY_FLOOR = 1e-300


@dataclass(frozen=True)
class LmcSchedule:
    """Langevin step-size schedule eta(n) = a_lmc * (b_lmc + n)^(-c_lmc)."""

    a_lmc: float
    b_lmc: float
    c_lmc: float

    def __post_init__(self):
        for name in ("a_lmc", "b_lmc", "c_lmc"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0:
                raise InvalidArgumentError(f"{name} must be > 0, got {v!r}")
            object.__setattr__(self, name, v)

    def step_size(self, n: int) -> float:
        return self.a_lmc * (self.b_lmc + n) ** (-self.c_lmc)


def _check_init(init_particles) -> np.ndarray:
    init = np.array(init_particles, dtype=float)
    if init.ndim != 2 or not np.all(np.isfinite(init)):
        raise InvalidArgumentError("init_particles must be a finite N x d matrix")
    return init


def _evaluate(evaluator, particles) -> Tuple[float, float]:
    if evaluator is None:
        return math.nan, math.nan
    return evaluator.evaluate(particles)


def _grad_log_density(target: DensityTarget, particles: np.ndarray) -> np.ndarray:
    """grad log rho = grad rho / rho with an underflow guard."""
    if target.density_and_grad is not None:
        vals, grads = target.density_and_grad(particles)
    else:
        vals = target.density(particles)
        grads = target.grad_density(particles)
    vals = np.asarray(vals, dtype=float)
    if np.any(vals < _DENSITY_FLOOR):
        raise NumericalFailureError(
            "target density underflowed below 1e-300; particles left the "
            "support of the floating-point density",
            last_iterate=particles,
        )
    return np.asarray(grads, dtype=float) / vals[:, None]


def _record_due(n: int, record_stride: int, max_iter: int) -> bool:
    """Rows land at stride boundaries and always at the final step."""
    return n % record_stride == 0 or n == max_iter


def _append_row(
    n: int,
    h_n: float,
    free_energy_value: float,
    particles: np.ndarray,
    prev_recorded: np.ndarray,
    evaluator,
    rows: List[IterationRow],
) -> np.ndarray:
    """Append one record row; displacement is measured against the previously
    recorded positions.  Returns the new "previous recorded" snapshot."""
    displacement = float(np.sum((particles - prev_recorded) ** 2))
    mmd2_eval, edist_eval = _evaluate(evaluator, particles)
    rows.append(
        IterationRow(
            n=n,
            h_n=h_n,
            free_energy=free_energy_value,
            mmd2_eval=mmd2_eval,
            energy_dist_eval=edist_eval,
            inner_iters=0,
            displacement=displacement,
        )
    )
    return particles.copy()


def explicit_euler_mmd_run(
    target,
    schedule: BandwidthSchedule,
    eta0: float,
    max_iter: int,
    rng: np.random.Generator,
    init_particles,
    *,
    mc_samples: int = 100,
    evaluator=None,
    record_stride: int = 1,
    on_step=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Plain gradient descent on the adaptive-bandwidth free energy:
    x <- x - eta0 * N * grad F_h(x), the explicit counterpart of the
    proximal update (the dissipation scaling is absorbed into eta0)."""
    if eta0 <= 0:
        raise InvalidArgumentError(f"eta0 must be > 0, got {eta0!r}")
    particles = _check_init(init_particles)
    n_particles, dim = particles.shape
    noise_rng, batch_rng = rng.spawn(2)

    density_branch = isinstance(target, DensityTarget)
    if density_branch:
        noise = McNoise.draw(noise_rng, mc_samples, dim)
    elif not isinstance(target, EmpiricalTarget):
        raise InvalidArgumentError(f"unknown target type: {type(target).__name__}")

    rows: List[IterationRow] = []
    prev_recorded = particles.copy()
    for n in range(1, max_iter + 1):
        h_n = bandwidth_at(schedule, n)
        kernel = KernelConfig.gaussian(h_n)
        if density_branch:
            value_fn, vg_fn = density_closures(target, kernel, noise)
        else:
            batch = draw_minibatch(target, batch_rng)
            value_fn, vg_fn = empirical_closures(batch, kernel)
        _, grad = vg_fn(particles)
        particles = particles - eta0 * n_particles * grad
        if not np.all(np.isfinite(particles)):
            raise NumericalFailureError(
                f"explicit update diverged at iteration {n}",
                last_iterate=prev_recorded,
                partial_record=RunRecord(tuple(rows)),
            )
        if on_step is not None:
            on_step(n, particles)
        if _record_due(n, record_stride, max_iter):
            prev_recorded = _append_row(
                n, h_n, value_fn(particles), particles, prev_recorded, evaluator, rows
            )
    return ParticleSet(particles, iteration=max_iter), RunRecord(tuple(rows))


def energy_distance_run(
    target: EmpiricalTarget,
    config: SolverConfig,
    rng: np.random.Generator,
    init_particles,
    *,
    evaluator=None,
    on_iteration=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Implicit-Euler minimization of the energy distance to the mini-batch.

    Identical outer/inner structure to the adaptive-bandwidth run, with the
    negative-Euclidean kernel and no bandwidth.  The batch-constant term of
    the energy distance does not enter the optimization but is added to the
    recorded free-energy column so the trace reports the full statistic.
    """
    if not isinstance(target, EmpiricalTarget):
        raise InvalidArgumentError("energy_distance_run requires an EmpiricalTarget")
    init = _check_init(init_particles)
    if target.dim != init.shape[1]:
        raise InvalidArgumentError(
            f"target dimension {target.dim} != particle dimension {init.shape[1]}"
        )
    _, batch_rng = rng.spawn(2)
    kernel = KernelConfig.negative_euclidean()

    def setup_for(n: int) -> IterationSetup:
        batch = draw_minibatch(target, batch_rng)
        value_fn, vg_fn = empirical_closures(batch, kernel)
        m = batch.shape[0]
        batch_const = -float(pairwise_distances(batch, batch).sum()) / (m * m)
        return IterationSetup(value_fn, vg_fn, h_n=math.nan, report_offset=batch_const)

    return run_implicit_loop(
        init,
        config.max_iter,
        config,
        setup_for,
        evaluator=evaluator,
        on_iteration=on_iteration,
    )


def svgd_step(
    particles: np.ndarray, target: DensityTarget, bandwidth: float, eta0: float
) -> np.ndarray:
    """One Stein variational update:

    x_i += eta0/N * sum_j [K(x_j, x_i) grad log rho(x_j) + grad_{x_j} K(x_j, x_i)]
    """
    n = particles.shape[0]
    h2 = bandwidth * bandwidth
    w = gram(particles, KernelConfig.gaussian(bandwidth))
    score = _grad_log_density(target, particles)
    drift = np.einsum("ji,jd->id", w, score)
    repulsion = (
        particles * w.sum(axis=0)[:, None] - np.einsum("ji,jd->id", w, particles)
    ) / h2
    return particles + eta0 / n * (drift + repulsion)


def svgd_run(
    target: DensityTarget,
    bandwidth: float,
    eta0: float,
    max_iter: int,
    init_particles,
    *,
    evaluator=None,
    record_stride: int = 100,
    on_step=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Stein variational gradient descent with a fixed kernel bandwidth.

    Deterministic given the initial particles.  The recorded free-energy
    column is NaN (the method does not track a kernel-discrepancy objective).
    """
    if not isinstance(target, DensityTarget):
        raise InvalidArgumentError("svgd_run requires a DensityTarget")
    if bandwidth <= 0:
        raise InvalidArgumentError(f"bandwidth must be > 0, got {bandwidth!r}")
    particles = _check_init(init_particles)
    rows: List[IterationRow] = []
    prev_recorded = particles.copy()
    for n in range(1, max_iter + 1):
        particles = svgd_step(particles, target, bandwidth, eta0)
        if on_step is not None:
            on_step(n, particles)
        if _record_due(n, record_stride, max_iter):
            prev_recorded = _append_row(
                n, bandwidth, math.nan, particles, prev_recorded, evaluator, rows
            )
    return ParticleSet(particles, iteration=max_iter), RunRecord(tuple(rows))


def lmc_run(
    target: DensityTarget,
    schedule: LmcSchedule,
    max_iter: int,
    rng: np.random.Generator,
    init_particles,
    *,
    noise_scale: float = 1.0,
    evaluator=None,
    record_stride: int = 100,
    on_step=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Unadjusted Langevin: per particle,
    x <- x + eta(n)/2 * grad log rho(x) + sqrt(eta(n)) * z,  z ~ N(0, I).

    ``noise_scale`` rescales the injected noise (0 gives the deterministic
    drift flow, useful for tests).  Rows are recorded every ``record_stride``
    steps with a NaN bandwidth column.
    """
    if not isinstance(target, DensityTarget):
        raise InvalidArgumentError("lmc_run requires a DensityTarget")
    particles = _check_init(init_particles)
    rows: List[IterationRow] = []
    prev_recorded = particles.copy()
    for n in range(1, max_iter + 1):
        eta = schedule.step_size(n)
        score = _grad_log_density(target, particles)
        noise = rng.standard_normal(particles.shape)
        particles = particles + 0.5 * eta * score + noise_scale * np.sqrt(eta) * noise
        if on_step is not None:
            on_step(n, particles)
        if _record_due(n, record_stride, max_iter):
            prev_recorded = _append_row(
                n, math.nan, math.nan, particles, prev_recorded, evaluator, rows
            )
    return ParticleSet(particles, iteration=max_iter), RunRecord(tuple(rows))
