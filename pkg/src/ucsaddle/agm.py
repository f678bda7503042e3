"""Adaptive gradient method for composite non-convex problems with an inexact oracle.

Minimises ``xi(x) + zeta(x)`` over a compact convex set, where ``xi`` is
only available through an inexact first-order oracle and ``zeta`` is
handled by the closed-form composite prox.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .problem import ProblemError, SaddleProblem
from .prox import composite_prox


class LineSearchFailure(RuntimeError):
    """Doubling budget exhausted: the oracle contract or declared constants are off."""


@dataclass(frozen=True)
class AgmConfig:
    epsilon: float = 1e-3
    l0: float = 1.0
    max_outer_iterations: int = 10_000
    max_doublings_per_iteration: int = 60
    stationarity_convention: str = "norm-squared"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ProblemError(f"epsilon must be positive, got {self.epsilon}")
        if not self.l0 > 0:
            raise ProblemError(f"l0 must be positive, got {self.l0}")
        if self.max_outer_iterations < 1 or self.max_doublings_per_iteration < 1:
            raise ProblemError("iteration budgets must be positive")
        if self.stationarity_convention not in ("norm", "norm-squared"):
            raise ProblemError(
                f"unknown stationarity convention {self.stationarity_convention!r}")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    m_k: float
    doublings: int
    delta_ck: float
    step_norm: float
    stationarity_measure: float
    oracle_value: float
    inner_iterations: int
    l_of_delta: float = math.nan

    @property
    def first_order_calls(self) -> int:
        # one oracle call at x_k and one at z_k per trial
        return 2 * (self.doublings + 1)


@dataclass
class SolverTrace:
    records: list = field(default_factory=list)
    best_index: int = -1
    output_point: Optional[np.ndarray] = None
    converged: bool = False
    total_first_order_calls: int = 0
    total_inner_iterations: int = 0
    points: list = field(default_factory=list)  # x_0, x_1, ..., x_{k}

    @property
    def best_stationarity(self) -> float:
        return self.records[self.best_index].stationarity_measure if self.records else math.inf


def agm_solve(problem: SaddleProblem, oracle, config: AgmConfig, x0,
              prox=composite_prox) -> SolverTrace:
    """Run the adaptive gradient method from ``x0``.

    ``oracle(x, delta_c, warm_start)`` must return an object with ``value``,
    ``gradient``, ``inner_iterations``, ``l_of_delta`` and ``y`` (warm start
    for the next call, may be ``None``).

    Raises
    ------
    LineSearchFailure
        If an iteration needs more than ``max_doublings_per_iteration`` trials.
    """
    x = problem.check_x(x0)
    feas, comp = problem.feasible_x, problem.composite
    eps = config.epsilon
    big_l = config.l0
    trace = SolverTrace(points=[x.copy()])
    warm = None
    best = math.inf
    for k in range(config.max_outer_iterations):
        m = big_l / 2.0
        inner_iters = 0
        for trial in range(config.max_doublings_per_iteration):
            m *= 2.0
            delta = eps / (20.0 * m)
            at_x = oracle(x, delta, warm)
            z = prox(at_x.gradient, x, 1.0 / m, feas, comp).point
            at_z = oracle(z, delta, at_x.y)
            inner_iters += at_x.inner_iterations + at_z.inner_iterations
            step = z - x
            sq = float(step @ step)
            model = (at_x.value + float(at_x.gradient @ step) + 0.5 * m * sq
                     + eps / (10.0 * m) + 2.0 * at_x.delta_u)
            if at_z.value <= model:
                break
        else:
            raise LineSearchFailure(
                f"iteration {k}: no acceptance after {config.max_doublings_per_iteration} "
                f"doublings (last M = {m:.3e})")
        step_norm = math.sqrt(sq)
        measure = m * step_norm
        if config.stationarity_convention == "norm-squared":
            measure = measure * measure
        rec = IterationRecord(k, m, trial, delta, step_norm, measure, at_x.value,
                              inner_iters, at_x.l_of_delta)
        trace.records.append(rec)
        trace.total_first_order_calls += rec.first_order_calls
        trace.total_inner_iterations += inner_iters
        if measure < best:
            best = measure
            trace.best_index = k
            trace.output_point = z.copy()
        x = z
        trace.points.append(x.copy())
        warm = at_z.y
        big_l = m / 2.0
        if best <= eps:
            trace.converged = True
            break
    return trace
