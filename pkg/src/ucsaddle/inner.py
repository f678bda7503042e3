"""Restarted acceleration for uniformly convex minimisation.

The restart layer is generic over a base algorithm that certifies

    f(A_m(y)) - f* <= c_A |y - y*|^d / m^r

and runs it with geometrically scheduled budgets. Termination is decided by
computable certificates derived from uniform convexity, never by the
schedule alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .problem import ProblemError, SaddleProblem, UniformConvexitySpec, as_vector


class InnerBudgetExhausted(RuntimeError):
    """Restart or iteration cap reached before the certificate was met.

    Carries the best point seen and its certified bounds so the caller can
    retry with a larger cap.
    """

    def __init__(self, message, point, gap_bound, distance_bound, iterations, restarts):
        super().__init__(message)
        self.point = point
        self.gap_bound = gap_bound
        self.distance_bound = distance_bound
        self.iterations = iterations
        self.restarts = restarts


class LineSearchDivergence(RuntimeError):
    """Local smoothness estimate blew past its cap: the declared constant is wrong."""


# ---------------------------------------------------------------------------
# rate certificates and schedules


@dataclass(frozen=True)
class RateCertificate:
    c_a: float
    rate_exponent_r: float
    distance_exponent: float

    def __post_init__(self):
        for name in ("c_a", "rate_exponent_r", "distance_exponent"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ProblemError(f"{name} must be positive and finite, got {val}")

    def guarantee(self, distance: float, m: int) -> float:
        return self.c_a * distance ** self.distance_exponent / m ** self.rate_exponent_r


@dataclass(frozen=True)
class RestartSchedule:
    m0: int
    k0: float  # math.inf when budgets never collapse to 1
    decay: float  # (d - q) / r; budgets scale as 2^(-decay * k)

    def budget(self, k: int) -> int:
        if k > self.k0 - 1:
            return 1
        expo = -self.decay * k
        if expo > 60:  # keep the arithmetic finite; callers cap by their iteration budget
            return 2 ** 62
        return max(1, math.ceil(self.m0 * 2.0 ** expo))

    def budgets(self, count: int) -> list:
        return [self.budget(k) for k in range(count)]


def compute_schedule(cert: RateCertificate, uniform: UniformConvexitySpec,
                     radius_r: float) -> RestartSchedule:
    """Initial budget ``m0`` and cut-off ``k0`` of the restart scheme."""
    if not radius_r > 0:
        raise ProblemError(f"radius_r must be positive, got {radius_r}")
    q, sig = uniform.degree_q, uniform.sigma_q
    d, r, c = cert.distance_exponent, cert.rate_exponent_r, cert.c_a
    m0 = math.ceil((2.0 ** q * q * c * radius_r ** (d - q) / sig) ** (1.0 / r))
    if q < d:
        k0 = float(math.ceil(1.0 / q + d / q * math.log2(radius_r)
                             + math.log2(q * c / sig) / (d - q)))
    else:
        k0 = math.inf
    return RestartSchedule(max(int(m0), 1), k0, (d - q) / r)


# ---------------------------------------------------------------------------
# certificates


def certify_gap(gradient, uniform: UniformConvexitySpec) -> float:
    """Upper bound on ``f(y) - f*`` from ``|grad f(y)|`` and uniform convexity."""
    q, sig = uniform.degree_q, uniform.sigma_q
    gn = float(np.linalg.norm(gradient))
    return (q - 1.0) / q * sig ** (-1.0 / (q - 1.0)) * gn ** (q / (q - 1.0))


def certify_distance(gradient, uniform: UniformConvexitySpec) -> float:
    """Upper bound on ``|y - y*|``: ``(q |grad| / (2 sigma_q))^(1/(q-1))``."""
    q, sig = uniform.degree_q, uniform.sigma_q
    gn = float(np.linalg.norm(gradient))
    return (q * gn / (2.0 * sig)) ** (1.0 / (q - 1.0))


def certify(objective, point, gradient) -> tuple:
    """``(gap_bound, distance_bound)`` at ``point``.

    Starts from the global uniform-convexity bounds, then tightens them with
    the objective's curvature floor on the ball that must contain ``y*``.
    """
    uniform = objective.uniform
    gap = certify_gap(gradient, uniform)
    dist = certify_distance(gradient, uniform)
    floor = getattr(objective, "curvature_floor", None)
    if floor is not None and dist > 0:
        mu = floor(point, dist)
        if mu > 0:
            gn = float(np.linalg.norm(gradient))
            gap = min(gap, gn * gn / (2.0 * mu))
            dist = min(dist, gn / mu)
    return gap, dist


def _gradient_tolerance(objective, point, gradient, target_gap, target_distance) -> float:
    """Gradient norm below which the certificates are expected to hold."""
    q, sig = objective.uniform.degree_q, objective.uniform.sigma_q
    tol_gap = (target_gap * q / (q - 1.0)) ** ((q - 1.0) / q) * sig ** (1.0 / q)
    tol_dist = math.inf
    if target_distance is not None:
        tol_dist = 2.0 * sig * target_distance ** (q - 1.0) / q
    floor = getattr(objective, "curvature_floor", None)
    if floor is not None:
        mu = floor(point, certify_distance(gradient, objective.uniform))
        if mu > 0:
            tol_gap = max(tol_gap, math.sqrt(2.0 * mu * target_gap))
            if target_distance is not None:
                tol_dist = max(tol_dist, mu * target_distance)
    return min(tol_gap, tol_dist)


# ---------------------------------------------------------------------------
# objectives


class InnerObjective:
    """Convex objective ``f`` over ``R^n`` with ``value_grad(y) -> (f, grad)``."""

    uniform: UniformConvexitySpec
    dim: int
    curvature_floor = None
    power_params = None  # (b, sigma, q, offset) when f = (sigma/q)|y|^q - <b,y> + offset

    def value_grad(self, y):
        raise NotImplementedError

    def value(self, y) -> float:
        return self.value_grad(y)[0]

    def gradient(self, y) -> np.ndarray:
        return self.value_grad(y)[1]


class SaddleInnerObjective(InnerObjective):
    """``f(y) = h(y) - F(x, y)``: the inner maximisation at fixed ``x`` as a minimisation."""

    def __init__(self, problem: SaddleProblem, x):
        self.problem = problem
        self.x = problem.check_x(x)
        self.dim = problem.dim_y
        self.uniform = problem.uniform
        if problem.h_curvature_floor is not None:
            # F(x, .) is concave, so the floor of h is a floor of f
            self.curvature_floor = problem.h_curvature_floor
        cpl = problem.coupling
        if cpl is not None:
            self.power_params = (cpl.matrix_a @ self.x, cpl.sigma, cpl.degree_q,
                                 -cpl.phi(self.x))

    def value_grad(self, y):
        p, x = self.problem, self.x
        val = float(p.eval_h(y)) - float(p.eval_f(x, y))
        return val, p.grad_h(y) - p.grad_f_y(x, y)


class RadialPowerObjective(InnerObjective):
    """``f(y) = (scale/degree) |y - center|^degree`` with minimum 0 at ``center``."""

    def __init__(self, center, scale: float = 1.0, degree: float = 2.0):
        self.center = as_vector(center, name="center")
        self.dim = self.center.size
        self.scale = float(scale)
        self.degree = float(degree)
        self.uniform = UniformConvexitySpec(self.degree, self.scale * 2.0 ** (2.0 - self.degree))

    def value_grad(self, y):
        d = np.asarray(y, dtype=float) - self.center
        nrm = float(np.linalg.norm(d))
        if nrm == 0.0:
            return 0.0, np.zeros_like(d)
        return (self.scale / self.degree * nrm ** self.degree,
                self.scale * nrm ** (self.degree - 2.0) * d)

    def distance_for_gap(self, gap: float) -> float:
        return (self.degree * gap / self.scale) ** (1.0 / self.degree)


# ---------------------------------------------------------------------------
# base algorithms


@dataclass
class BaseOutput:
    point: np.ndarray
    value: float
    gradient: np.ndarray
    iterations: int
    max_estimate: float = 0.0


class InnerAlgorithm:
    """An algorithm ``A`` with ``run(objective, start, m, ...)`` and a rate certificate."""

    certificate: RateCertificate

    def run(self, objective, start, m, grad_tol=0.0, target_gap=0.0) -> BaseOutput:
        raise NotImplementedError


class SyntheticBase(InnerAlgorithm):
    """Test double meeting the rate guarantee with equality.

    From ``y`` it returns the point on the ray ``y* -> y`` whose gap is exactly
    ``c_A |y - y*|^d / m^r``; the point may lie farther out than ``y`` when
    the guarantee is loose (small ``m``).
    """

    def __init__(self, true_minimizer, cert: RateCertificate):
        self.y_star = as_vector(true_minimizer, name="true_minimizer")
        self.certificate = cert

    def _distance_for_gap(self, objective, direction, gap):
        if hasattr(objective, "distance_for_gap"):
            return objective.distance_for_gap(gap)
        f_star = objective.value(self.y_star)

        def excess(t):
            return objective.value(self.y_star + t * direction) - f_star - gap

        hi = 1.0
        while excess(hi) < 0:
            hi *= 2.0
        if excess(0.0) >= 0:
            return 0.0
        return brentq(excess, 0.0, hi, xtol=1e-15, rtol=1e-15)

    def run(self, objective, start, m, grad_tol=0.0, target_gap=0.0):
        start = np.asarray(start, dtype=float)
        diff = start - self.y_star
        dist = float(np.linalg.norm(diff))
        if dist == 0.0:
            point = self.y_star.copy()
        else:
            gap = self.certificate.guarantee(dist, m)
            point = self.y_star + self._distance_for_gap(objective, diff / dist, gap) * diff / dist
        val, grad = objective.value_grad(point)
        return BaseOutput(point, val, grad, int(m))


def make_synthetic_base(true_minimizer, cert: RateCertificate) -> SyntheticBase:
    return SyntheticBase(true_minimizer, cert)


class FastGradientBase(InnerAlgorithm):
    """Accelerated gradient method with backtracking on the local smoothness.

    With ``holder_nu = 1`` this is the accelerated method with an adaptive
    Lipschitz estimate; for ``holder_nu < 1`` the acceptance test carries the
    universal-method slack ``tau * target_gap / 2``.
    """

    def __init__(self, smoothness_l: float, holder_nu: float = 1.0, cap_factor: float = 2.0 ** 30):
        if not smoothness_l > 0:
            raise ProblemError(f"smoothness_l must be positive, got {smoothness_l}")
        if not 0 < holder_nu <= 1:
            raise ProblemError(f"holder_nu must lie in (0, 1], got {holder_nu}")
        self.smoothness_l = float(smoothness_l)
        self.holder_nu = float(holder_nu)
        self.cap = cap_factor * self.smoothness_l
        self.certificate = RateCertificate(8.0 * self.smoothness_l,
                                           (1.0 + 3.0 * holder_nu) / 2.0, 1.0 + holder_nu)

    def run(self, objective, start, m, grad_tol=0.0, target_gap=0.0):
        slack = 0.0 if self.holder_nu == 1.0 else float(target_gap)
        start = np.ascontiguousarray(start, dtype=float)
        params = objective.power_params
        if params is not None:
            b, sigma, q, offset = params
            y, g, iters, _, max_m, status = kernels.fgm_power(
                start, np.ascontiguousarray(b, dtype=float), float(sigma), float(q),
                int(m), self.smoothness_l, slack, float(grad_tol), self.cap)
        else:
            y, g, iters, _, max_m, status = kernels.fgm_loop(
                objective.value_grad, start, int(m), self.smoothness_l, slack,
                float(grad_tol), self.cap)
        if status:
            raise LineSearchDivergence(
                f"local smoothness estimate exceeded {self.cap:.3e}; "
                f"declared smoothness {self.smoothness_l:.3e} is likely wrong")
        val, grad = objective.value_grad(y)
        return BaseOutput(y, val, grad, int(iters), max_m)


def fast_gradient_base(smoothness_l: float, holder_nu: float = 1.0) -> FastGradientBase:
    return FastGradientBase(smoothness_l, holder_nu)


# ---------------------------------------------------------------------------
# restart driver


@dataclass
class InnerSolution:
    point: np.ndarray
    gap_bound: float
    iterations_used: int
    restarts_used: int
    distance_bound: float = math.inf
    value: float = math.nan
    gradient: Optional[np.ndarray] = None
    history: list = field(default_factory=list)


def restarted_solve(objective, base: InnerAlgorithm, uniform: UniformConvexitySpec, start,
                    radius_r: float, target_gap: float, target_distance: Optional[float] = None,
                    max_restarts: int = 200, max_iterations: int = 200_000,
                    record: bool = False) -> InnerSolution:
    """Run restarts ``z_{k+1} = A_{m_k}(z_k)`` until the gap (and distance) are certified.

    ``uniform`` drives the schedule; the objective's own spec drives the
    certificates (they normally coincide).
    """
    if not target_gap > 0:
        raise ProblemError(f"target_gap must be positive, got {target_gap}")
    schedule = compute_schedule(base.certificate, uniform, radius_r)
    y = np.asarray(start, dtype=float).copy()
    val, grad = objective.value_grad(y)
    gap, dist = certify(objective, y, grad)
    best = (gap, dist, y, val, grad)
    dist_goal = math.inf if target_distance is None else target_distance
    restarts = iterations = 0
    stalled = False
    history = []
    if record:
        history.append(dict(restart=0, budget=0, iterations=0, gap_bound=gap, distance_bound=dist,
                            point=y.copy()))

    while not (gap <= target_gap and dist <= dist_goal):
        if restarts >= max_restarts or iterations >= max_iterations:
            bgap, bdist, by = best[0], best[1], best[2]
            raise InnerBudgetExhausted(
                f"inner solve stopped after {restarts} restarts / {iterations} iterations "
                f"with certified gap {bgap:.3e} (target {target_gap:.3e}), distance "
                f"{bdist:.3e} (target {dist_goal:.3e})",
                by, bgap, bdist, iterations, restarts)
        budget = min(schedule.budget(restarts), max_iterations - iterations)
        tol = _gradient_tolerance(objective, y, grad, target_gap, target_distance)
        if stalled:
            tol = 0.0
        out = base.run(objective, y, budget, grad_tol=tol, target_gap=target_gap)
        iterations += out.iterations
        restarts += 1
        y, val, grad = out.point, out.value, out.gradient
        stalled = out.iterations == 0
        gap, dist = certify(objective, y, grad)
        if gap < best[0]:
            best = (gap, dist, y, val, grad)
        if record:
            history.append(dict(restart=restarts, budget=budget, iterations=out.iterations,
                                gap_bound=gap, distance_bound=dist, point=y.copy()))
    return InnerSolution(y, gap, iterations, restarts, dist, val, grad, history)
