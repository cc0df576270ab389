"""Implicit-Euler particle updates with an adaptive kernel bandwidth.

Each outer iteration n sets the bandwidth from a decaying schedule and moves
the particles to (approximately) minimize the proximal objective

    J_n(x) = 1/(2 tau* N) * sum_i |x_i - x_i^(n)|^2 + F_h(x),

using an in-house L-BFGS with Armijo backtracking.  Because the inner solver
only ever accepts decreasing steps, J_n(x^(n+1)) <= J_n(x^(n)) holds at every
iteration, which bounds the per-iteration particle displacement by the free
energy decrease.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError, NumericalFailureError
from .free_energy import McNoise, density_closures, empirical_closures
from .kernels import pairwise_distances
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

# Line-search constants: standard robust defaults (contraction 1/2,
# sufficient-decrease 1e-4, unit initial step).
_LS_CONTRACTION = 0.5
_LS_SUFFICIENT_DECREASE = 1e-4
_LS_INITIAL_STEP = 1.0
_LS_MIN_STEP = 1e-14


def bandwidth_at(schedule: BandwidthSchedule, n: int) -> float:
    """Bandwidth a / n^c + b at outer iteration n >= 1."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"iteration index must be >= 1, got {n!r}")
    return schedule.a / float(n) ** schedule.c + schedule.b


def median_pairwise_distance(points) -> float:
    """Median over the N(N-1)/2 distinct-pair Euclidean distances."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise InvalidArgumentError(
            f"need at least two points in a 2-d array, got shape {points.shape}"
        )
    dist = pairwise_distances(points, points)
    iu = np.triu_indices(points.shape[0], k=1)
    return float(np.median(dist[iu]))


def auto_schedule(init_particles, b: float, c: float) -> BandwidthSchedule:
    """Schedule whose initial scale a is the median pairwise distance of the
    initial particles."""
    return BandwidthSchedule(a=median_pairwise_distance(init_particles), b=b, c=c)


def proximal_objective(
    candidate, anchor, tau_star: float, free_energy_fn: Callable[[np.ndarray], float]
) -> float:
    """J_n: quadratic proximity to the anchor plus the free energy."""
    candidate = np.asarray(candidate, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    if candidate.shape != anchor.shape:
        raise InvalidArgumentError(
            f"candidate shape {candidate.shape} != anchor shape {anchor.shape}"
        )
    if tau_star <= 0:
        raise InvalidArgumentError(f"tau_star must be > 0, got {tau_star!r}")
    n = candidate.shape[0]
    prox = float(np.sum((candidate - anchor) ** 2)) / (2.0 * tau_star * n)
    return prox + free_energy_fn(candidate)


class LbfgsState:
    """Curvature memory for the two-loop recursion.

    Keeps at most ``memory`` (step, gradient-difference) pairs; pairs whose
    inner product is non-positive are discarded to preserve a positive
    definite implicit Hessian approximation.
    """

    def __init__(self, memory: int):
        self.memory = memory
        self.pairs: List[Tuple[np.ndarray, np.ndarray, float]] = []
        self.iteration = 0
        self.last_value = math.nan

    def push(self, step: np.ndarray, grad_diff: np.ndarray) -> bool:
        sy = float(np.dot(step, grad_diff))
        if sy <= 0.0:
            # An Armijo-accepted step with non-positive curvature means the
            # accumulated approximation is stale; restart it, otherwise the
            # same tiny direction gets re-proposed indefinitely.
            self.pairs.clear()
            return False
        self.pairs.append((step, grad_diff, 1.0 / sy))
        if len(self.pairs) > self.memory:
            self.pairs.pop(0)
        return True

    def direction(self, grad: np.ndarray) -> np.ndarray:
        """Two-loop recursion for -H grad."""
        q = grad.copy()
        alphas = []
        for s, y, rho in reversed(self.pairs):
            a = rho * float(np.dot(s, q))
            q -= a * y
            alphas.append(a)
        if self.pairs:
            s, y, rho = self.pairs[-1]
            gamma = float(np.dot(s, y)) / float(np.dot(y, y))
            q *= gamma
        for (s, y, rho), a in zip(self.pairs, reversed(alphas)):
            b = rho * float(np.dot(y, q))
            q += (a - b) * s
        return -q


@dataclass(frozen=True)
class LbfgsResult:
    x: np.ndarray
    value: float
    iterations: int
    start_value: float = math.nan


def lbfgs_minimize(
    fun_and_grad: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    start,
    config: SolverConfig,
    *,
    value_fn: Optional[Callable[[np.ndarray], float]] = None,
) -> LbfgsResult:
    """Minimize a smooth objective from ``start`` with L-BFGS plus Armijo
    backtracking.

    ``fun_and_grad`` returns (value, gradient) at a point of the same shape
    as ``start``; ``value_fn``, when given, is a cheaper value-only evaluation
    used inside the line search.  Terminates when the gradient sup-norm drops
    to ``config.lbfgs_grad_tol`` or after ``config.lbfgs_max_inner`` accepted
    steps; a stalled line search returns the current (still monotone) iterate.

    Raises :class:`NumericalFailureError` when the objective or gradient is
    non-finite at the start or at an accepted point; the error carries the
    last finite iterate.  Non-finite values at rejected trial points merely
    shorten the step.
    """
    x = np.array(start, dtype=float)
    shape = x.shape
    x = x.ravel()

    def fused(flat: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = fun_and_grad(flat.reshape(shape))
        return float(value), np.asarray(grad, dtype=float).ravel()

    if value_fn is None:
        def trial_value(flat: np.ndarray) -> float:
            return fused(flat)[0]
    else:
        def trial_value(flat: np.ndarray) -> float:
            return float(value_fn(flat.reshape(shape)))

    f, g = fused(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericalFailureError(
            "objective or gradient non-finite at the starting point",
            last_iterate=x.reshape(shape),
        )
    start_value = f

    state = LbfgsState(config.lbfgs_memory)
    iterations = 0
    while iterations < config.lbfgs_max_inner:
        if float(np.max(np.abs(g))) <= config.lbfgs_grad_tol:
            break
        direction = state.direction(g)
        slope = float(np.dot(g, direction))
        if slope >= 0.0:
            direction = -g
            slope = -float(np.dot(g, g))

        alpha = _LS_INITIAL_STEP
        accepted = None
        while alpha >= _LS_MIN_STEP:
            candidate = x + alpha * direction
            f_trial = trial_value(candidate)
            if np.isfinite(f_trial) and f_trial <= f + _LS_SUFFICIENT_DECREASE * alpha * slope:
                accepted = candidate
                break
            alpha *= _LS_CONTRACTION
        if accepted is None:
            break  # stall: keep the current iterate, descent holds trivially

        f_new, g_new = fused(accepted)
        if not np.isfinite(f_new) or not np.all(np.isfinite(g_new)):
            raise NumericalFailureError(
                "objective or gradient non-finite at an accepted step",
                last_iterate=x.reshape(shape),
            )
        state.push(accepted - x, g_new - g)
        x, f, g = accepted, f_new, g_new
        iterations += 1
        state.iteration = iterations
        state.last_value = f

    return LbfgsResult(
        x=x.reshape(shape), value=f, iterations=iterations, start_value=start_value
    )


@dataclass(frozen=True)
class IterationInfo:
    """Diagnostics handed to ``on_iteration`` callbacks after each outer step."""

    n: int
    h_n: float
    particles: np.ndarray
    anchor_objective: float
    final_objective: float
    free_energy: float
    displacement: float
    inner_iters: int


def _evaluate(evaluator, particles: np.ndarray) -> Tuple[float, float]:
    if evaluator is None:
        return math.nan, math.nan
    return evaluator.evaluate(particles)


def implicit_step(
    anchor: np.ndarray,
    tau_star: float,
    value_fn: Callable[[np.ndarray], float],
    value_and_grad_fn: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    config: SolverConfig,
) -> Tuple[np.ndarray, float, float, int]:
    """One proximal minimization from ``anchor``.

    Returns (new particles, J at anchor, J at the result, inner iterations).
    """
    n = anchor.shape[0]
    scale = 1.0 / (2.0 * tau_star * n)

    def j_value(x: np.ndarray) -> float:
        return scale * float(np.sum((x - anchor) ** 2)) + value_fn(x)

    def j_value_and_grad(x: np.ndarray) -> Tuple[float, np.ndarray]:
        f, grad = value_and_grad_fn(x)
        diff = x - anchor
        return scale * float(np.sum(diff**2)) + f, grad + diff / (tau_star * n)

    result = lbfgs_minimize(j_value_and_grad, anchor, config, value_fn=j_value)
    # J at the anchor equals the bare free energy there (zero proximity term).
    return result.x, result.start_value, result.value, result.iterations


@dataclass(frozen=True)
class IterationSetup:
    """Objective closures and reporting constants for one outer iteration.

    ``report_offset`` is added to the recorded free energy only (e.g. the
    batch-constant term of the energy distance); it never enters the
    optimization.
    """

    value_fn: Callable[[np.ndarray], float]
    value_and_grad_fn: Callable[[np.ndarray], Tuple[float, np.ndarray]]
    h_n: float = math.nan
    report_offset: float = 0.0


def run_implicit_loop(
    init: np.ndarray,
    max_iter: int,
    config: SolverConfig,
    setup_for: Callable[[int], IterationSetup],
    *,
    evaluator=None,
    on_iteration=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Shared implicit-Euler loop for the adaptive-bandwidth and
    energy-distance methods.  With ``max_iter`` iterations exhausted (or zero
    requested) the current particles are returned unchanged beyond the last
    completed step."""
    particles = np.array(init, dtype=float)
    n_particles = particles.shape[0]
    tau_star = config.tau_star
    rows: List[IterationRow] = []
    for n in range(1, max_iter + 1):
        setup = setup_for(n)
        try:
            new_particles, j_anchor, j_final, inner = implicit_step(
                particles, tau_star, setup.value_fn, setup.value_and_grad_fn, config
            )
        except NumericalFailureError as exc:
            raise NumericalFailureError(
                f"inner solve failed at outer iteration {n}: {exc}",
                last_iterate=particles,
                partial_record=RunRecord(tuple(rows)),
            ) from exc
        displacement = float(np.sum((new_particles - particles) ** 2))
        free_energy_value = j_final - displacement / (2.0 * tau_star * n_particles)
        mmd2_eval, edist_eval = _evaluate(evaluator, new_particles)
        rows.append(
            IterationRow(
                n=n,
                h_n=setup.h_n,
                free_energy=free_energy_value + setup.report_offset,
                mmd2_eval=mmd2_eval,
                energy_dist_eval=edist_eval,
                inner_iters=inner,
                displacement=displacement,
            )
        )
        if on_iteration is not None:
            on_iteration(
                IterationInfo(
                    n=n,
                    h_n=setup.h_n,
                    particles=new_particles,
                    anchor_objective=j_anchor,
                    final_objective=j_final,
                    free_energy=free_energy_value,
                    displacement=displacement,
                    inner_iters=inner,
                )
            )
        particles = new_particles
    return ParticleSet(particles, iteration=max_iter), RunRecord(tuple(rows))


def draw_minibatch(target: EmpiricalTarget, rng: np.random.Generator) -> np.ndarray:
    """Sample the target's mini-batch without replacement."""
    idx = rng.choice(target.n_rows, size=target.minibatch_size, replace=False)
    return target.data[idx]


def evi_mmd_run(
    target,
    schedule: BandwidthSchedule,
    config: SolverConfig,
    rng: np.random.Generator,
    init_particles,
    *,
    evaluator=None,
    on_iteration=None,
) -> Tuple[ParticleSet, RunRecord]:
    """Run the adaptive-bandwidth implicit sampler.

    Density targets get a Monte-Carlo cross term with noise drawn once before
    the loop (``config.mc_samples`` draws); empirical targets redraw a
    mini-batch at every outer iteration and hold it fixed across the inner
    solve.  ``rng`` spawns the noise and mini-batch streams; initial particles
    are supplied by the caller (see :func:`evi_mmd.model.initial_particles`
    and :func:`auto_schedule` for the default recipe).
    """
    init = np.array(init_particles, dtype=float)
    if init.ndim != 2:
        raise InvalidArgumentError(f"init_particles must be N x d, got shape {init.shape}")
    dim = init.shape[1]
    noise_rng, batch_rng = rng.spawn(2)

    if not isinstance(target, (DensityTarget, EmpiricalTarget)):
        raise InvalidArgumentError(f"unknown target type: {type(target).__name__}")
    if target.dim != dim:
        raise InvalidArgumentError(
            f"target dimension {target.dim} != particle dimension {dim}"
        )

    if isinstance(target, DensityTarget):
        noise = McNoise.draw(noise_rng, config.mc_samples, dim)

        def setup_for(n: int) -> IterationSetup:
            h_n = bandwidth_at(schedule, n)
            kernel = KernelConfig.gaussian(h_n)
            value_fn, vg_fn = density_closures(target, kernel, noise)
            return IterationSetup(value_fn, vg_fn, h_n=h_n)

    elif isinstance(target, EmpiricalTarget):

        def setup_for(n: int) -> IterationSetup:
            h_n = bandwidth_at(schedule, n)
            kernel = KernelConfig.gaussian(h_n)
            batch = draw_minibatch(target, batch_rng)
            value_fn, vg_fn = empirical_closures(batch, kernel)
            return IterationSetup(value_fn, vg_fn, h_n=h_n)

    return run_implicit_loop(
        init,
        config.max_iter,
        config,
        setup_for,
        evaluator=evaluator,
        on_iteration=on_iteration,
    )
