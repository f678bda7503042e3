"""Inexact first-order oracle for ``g(x) = max_y F(x, y) - h(y)``.

Each call solves the inner problem to a certified accuracy chosen so that
the returned pair ``(value, gradient)`` obeys the inexact-oracle inequalities
with the requested ``delta_c``, and reports the matching smoothness
parameter ``L(delta_c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .inner import (FastGradientBase, InnerBudgetExhausted, SaddleInnerObjective,
                    SyntheticBase, certify_distance, restarted_solve)
from .problem import (CheckResult, HolderSpec, ProblemError, SaddleProblem,
                      UniformConvexitySpec, ValidationReport)


@dataclass(frozen=True)
class GHolderConstants:
    l_nu_g: float
    nu_g: float


def holder_constant_g(holder: HolderSpec, uniform: UniformConvexitySpec,
                      diameter_d0: float) -> GHolderConstants:
    """Hölder constant and exponent of ``grad g`` over a set of diameter ``D0``.

    ``nu_g = nu / (q - nu)`` and
    ``L = L_xy (q L_xy / sigma_q)^(nu/(q-nu)) + L_xx D0^(nu (q-nu-1)/(q-nu))``.
    """
    nu, q, sig = holder.exponent_nu, uniform.degree_q, uniform.sigma_q
    if not 0 < nu <= 1:
        raise ProblemError(f"exponent nu must lie in (0, 1] for the value function, got {nu}")
    if not q > nu:
        raise ProblemError(f"degree q = {q} must exceed nu = {nu}")
    if not diameter_d0 > 0:
        raise ProblemError(f"diameter must be positive, got {diameter_d0}")
    expo = nu / (q - nu)
    coupled = holder.l_xy * (q * holder.l_xy / sig) ** expo if holder.l_xy > 0 else 0.0
    direct = holder.l_xx * diameter_d0 ** (nu * (q - nu - 1.0) / (q - nu))
    return GHolderConstants(coupled + direct, expo)


def y_star_holder_constant(holder: HolderSpec, uniform: UniformConvexitySpec) -> tuple:
    """``(constant, exponent)`` of the Hölder bound on the inner maximiser."""
    nu, q = holder.exponent_nu, uniform.degree_q
    return (q * holder.l_xy / uniform.sigma_q) ** (1.0 / (q - nu)), 1.0 / (q - nu)


def l_of_delta(constants: GHolderConstants, delta: float) -> float:
    """Quadratic-model constant ``L(delta)`` for a Hölder gradient."""
    if not delta > 0:
        raise ProblemError(f"delta must be positive, got {delta}")
    nu = constants.nu_g
    scale = constants.l_nu_g ** (2.0 / (1.0 + nu))
    if nu == 1.0:
        return scale
    expo = (1.0 - nu) / (1.0 + nu)
    return ((1.0 - nu) / (1.0 + nu) * 2.0 / delta) ** expo * scale


@dataclass(frozen=True, eq=False)
class InexactOracleResponse:
    value: float
    gradient: np.ndarray
    delta_c: float
    delta_u: float
    l_of_delta: float
    inner_iterations: int
    inner_restarts: int = 0
    y: Optional[np.ndarray] = None
    gap_bound: float = 0.0
    distance_bound: float = 0.0


def inner_targets(problem: SaddleProblem, delta_c: float) -> tuple:
    """``(target_gap, target_distance)`` for the inner solve.

    Half of ``delta_c`` goes to the value error, half to the linear-model
    error ``L_xy |y~ - y*|^nu D0`` of the gradient over the feasible set.
    """
    target_gap = 0.5 * delta_c
    lxy = problem.holder.l_xy
    if lxy <= 0:
        return target_gap, None
    d0 = problem.feasible_x.diameter_d0
    nu = problem.holder.exponent_nu
    return target_gap, (delta_c / (2.0 * lxy * d0)) ** (1.0 / nu)


def inner_smoothness(problem: SaddleProblem, center, radius: float) -> float:
    """Lipschitz estimate of ``grad_y`` of the inner objective on a ball."""
    cpl = problem.coupling
    lyy = problem.holder.l_yy
    if cpl is not None:
        q = cpl.degree_q
        rho = float(np.linalg.norm(center)) + radius
        lh = cpl.sigma if q == 2.0 else cpl.sigma * (q - 1.0) * rho ** (q - 2.0)
        return max(lh + lyy, 1e-12)
    return max(lyy + problem.uniform.sigma_q, 1e-12)


class InexactOracle:
    """Callable oracle ``(x, delta_c, warm_start) -> InexactOracleResponse``.

    Counts calls and inner iterations; keeps no per-point state, so warm
    starts are the caller's business.
    """

    def __init__(self, problem: SaddleProblem, base: str = "fast-gradient",
                 max_restarts: int = 200, max_iterations: int = 200_000):
        if base not in ("fast-gradient", "synthetic"):
            raise ProblemError(f"unknown inner base {base!r}")
        if base == "synthetic" and problem.analytic is None:
            raise ProblemError("the synthetic inner base needs an analytic inner solution")
        self.problem = problem
        self.base = base
        self.max_restarts = max_restarts
        self.max_iterations = max_iterations
        self.constants = holder_constant_g(problem.holder, problem.uniform,
                                           problem.feasible_x.diameter_d0)
        self.calls = 0
        self.inner_iterations = 0

    def _make_base(self, x, start, radius):
        if self.base == "synthetic":
            from .inner import RateCertificate
            q = self.problem.uniform.degree_q
            return SyntheticBase(self.problem.analytic.y_star(x), RateCertificate(4.0, 2.0, q))
        return FastGradientBase(inner_smoothness(self.problem, start, radius))

    def __call__(self, x, delta_c: float, warm_start=None) -> InexactOracleResponse:
        if not delta_c > 0:
            raise ProblemError(f"delta_c must be positive, got {delta_c}")
        p = self.problem
        objective = SaddleInnerObjective(p, x)
        x = objective.x
        start = np.zeros(p.dim_y) if warm_start is None else np.asarray(warm_start, dtype=float)
        _, g0 = objective.value_grad(start)
        radius = max(certify_distance(g0, p.uniform), 1e-12)
        target_gap, target_dist = inner_targets(p, delta_c)
        base = self._make_base(x, start, radius)
        try:
            sol = restarted_solve(objective, base, p.uniform, start, radius, target_gap,
                                  target_dist, max_restarts=self.max_restarts,
                                  max_iterations=self.max_iterations)
        except InnerBudgetExhausted as exc:
            raise InnerBudgetExhausted(
                f"oracle at x={np.array2string(x, precision=4)} (delta_c={delta_c:.3e}, "
                f"inner gap target {target_gap:.3e}): {exc}",
                exc.point, exc.gap_bound, exc.distance_bound, exc.iterations,
                exc.restarts) from exc
        y = sol.point
        self.calls += 1
        self.inner_iterations += sol.iterations_used
        return InexactOracleResponse(
            value=float(p.eval_f(x, y)) - float(p.eval_h(y)),
            gradient=np.asarray(p.grad_f_x(x, y), dtype=float),
            delta_c=float(delta_c), delta_u=0.0,
            l_of_delta=l_of_delta(self.constants, delta_c),
            inner_iterations=sol.iterations_used, inner_restarts=sol.restarts_used,
            y=y, gap_bound=sol.gap_bound, distance_bound=sol.distance_bound)


def oracle_call(problem: SaddleProblem, x, delta_c: float, inner: Optional[InexactOracle] = None,
                warm_start=None) -> InexactOracleResponse:
    if inner is None:
        inner = InexactOracle(problem)
    return inner(x, delta_c, warm_start)


# ---------------------------------------------------------------------------
# sampled checks of the value-function constants


def sample_feasible_pairs(problem: SaddleProblem, rng, n: int, min_coupling: float = 1e-3):
    """``n`` feasible points, rejecting those with ``|Ax| < min_coupling`` for q > 2."""
    cpl = problem.coupling
    out = []
    while len(out) < n:
        pts = problem.feasible_x.sample(rng, 2 * n)
        for x in pts:
            if cpl is not None and cpl.degree_q > 2 and np.any(cpl.matrix_a):
                if np.linalg.norm(cpl.matrix_a @ x) < min_coupling:
                    continue
            out.append(x)
            if len(out) == n:
                break
    return np.array(out)


def validate_value_function(problem: SaddleProblem, samples: int = 1000, rng_seed: int = 0,
                            slack: float = 1e-6) -> ValidationReport:
    """Hölder bounds on ``y*`` and ``grad g`` over sampled feasible pairs.

    Requires the analytic bundle.
    """
    if problem.analytic is None:
        raise ProblemError("value-function checks need an analytic inner solution")
    rng = np.random.default_rng(rng_seed)
    an = problem.analytic
    consts = holder_constant_g(problem.holder, problem.uniform, problem.feasible_x.diameter_d0)
    c_y, e_y = y_star_holder_constant(problem.holder, problem.uniform)
    xs = sample_feasible_pairs(problem, rng, 2 * samples)
    worst_y = worst_g = 0.0
    for i in range(samples):
        x1, x2 = xs[2 * i], xs[2 * i + 1]
        dx = float(np.linalg.norm(x1 - x2))
        if dx < 1e-12:
            continue
        worst_y = max(worst_y, float(np.linalg.norm(an.y_star(x1) - an.y_star(x2))) / dx ** e_y)
        worst_g = max(worst_g, float(np.linalg.norm(an.grad_g_exact(x1) - an.grad_g_exact(x2)))
                      / dx ** consts.nu_g)
    return ValidationReport([
        CheckResult("y_star_holder", c_y, worst_y, worst_y <= c_y * (1 + slack) + 1e-15,
                    f"exponent {e_y:.4g}"),
        CheckResult("grad_g_holder", consts.l_nu_g, worst_g,
                    worst_g <= consts.l_nu_g * (1 + slack) + 1e-15,
                    f"exponent {consts.nu_g:.4g}"),
    ])


def gradient_identity_error(problem: SaddleProblem, x, step: float = 1e-5) -> float:
    """Relative error between ``grad_x F(x, y*(x))`` and central differences of ``g``."""
    an = problem.analytic
    x = np.asarray(x, dtype=float)
    grad = np.asarray(problem.grad_f_x(x, an.y_star(x)), dtype=float)
    fd = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        fd[i] = (an.g_exact(x + e) - an.g_exact(x - e)) / (2.0 * step)
    return float(np.linalg.norm(grad - fd)) / max(float(np.linalg.norm(fd)), 1e-300)
