"""Euclidean prox setup: Bregman divergence, projections and the composite prox.

All shipped (set, composite) pairs have closed-form minimisers, so the
certified slack of every returned point is zero. ``variational_slack``
recomputes the optimality certificate independently for testing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .problem import Ball, Box, CompositeTerm, FeasibleSet, ProblemError, Simplex, as_vector


class UnsupportedProxError(ProblemError):
    pass


@dataclass(frozen=True, eq=False)
class ProxResult:
    point: np.ndarray
    certificate_delta: float = 0.0


class EuclideanSetup:
    """Prox-function ``d(x) = 1/2 |x|^2``.

    Solvers only touch ``grad_d`` and ``divergence``; another distance
    generating function can be dropped in by subclassing.
    """

    def d(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.5 * float(x @ x)

    def grad_d(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def divergence(self, center, point) -> float:
        center = as_vector(center, name="center")
        point = as_vector(point, dim=center.size, name="point")
        return self.d(point) - self.d(center) - float(self.grad_d(center) @ (point - center))


EUCLIDEAN = EuclideanSetup()


def bregman_divergence(center, point) -> float:
    """``V_center(point)``; ``1/2 |point - center|^2`` for the Euclidean setup."""
    center = as_vector(center, name="center")
    point = as_vector(point, dim=center.size, name="point")
    diff = point - center
    return 0.5 * float(diff @ diff)


def project(point, feasible: FeasibleSet) -> np.ndarray:
    """Euclidean projection onto a box, ball or simplex."""
    point = as_vector(point, feasible.dim, "point")
    if isinstance(feasible, Box):
        return np.clip(point, feasible.lower, feasible.upper)
    if isinstance(feasible, Ball):
        diff = point - feasible.center
        nrm = float(np.linalg.norm(diff))
        if nrm <= feasible.radius:
            return point.copy()
        return feasible.center + (feasible.radius / nrm) * diff
    if isinstance(feasible, Simplex):
        return kernels.project_simplex(np.ascontiguousarray(point), float(feasible.scale))
    raise UnsupportedProxError(f"no projection for {type(feasible).__name__}")


def soft_threshold(v: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def composite_prox(eta, center, gamma: float, feasible: FeasibleSet,
                   composite: CompositeTerm) -> ProxResult:
    """Minimise ``<eta, x> + |x - center|^2 / (2 gamma) + r(x)`` over the set.

    Raises
    ------
    UnsupportedProxError
        For an l1 term on a ball not centred at the origin, where the
        shrink-then-project formula is not exact.
    """
    if not gamma > 0:
        raise ProblemError(f"gamma must be positive, got {gamma}")
    eta = as_vector(eta, feasible.dim, "eta")
    center = as_vector(center, feasible.dim, "center")
    v = center - gamma * eta
    if composite.kind == "l1" and composite.weight > 0:
        if isinstance(feasible, Simplex):
            # |x|_1 is the constant `scale` on the simplex
            pass
        elif isinstance(feasible, Ball) and np.any(feasible.center != 0.0):
            raise UnsupportedProxError(
                "composite prox for (ball with nonzero center, l1) has no closed form")
        else:
            v = soft_threshold(v, gamma * composite.weight)
    elif composite.kind == "quadratic":
        v = v / (1.0 + gamma * composite.weight)
    return ProxResult(project(v, feasible), 0.0)


def _subgradient(x, v, composite: CompositeTerm, feasible: FeasibleSet) -> np.ndarray:
    """A subgradient of ``r`` at ``x`` chosen to cancel ``v`` where possible."""
    if composite.kind == "quadratic":
        return composite.weight * x
    if composite.kind == "l1" and composite.weight > 0:
        lam = composite.weight
        if isinstance(feasible, Simplex):
            return np.full_like(x, lam)
        s = lam * np.sign(x)
        zero = x == 0.0
        s[zero] = np.clip(-v[zero], -lam, lam)
        return s
    return np.zeros_like(x)


def _min_linear(w: np.ndarray, feasible: FeasibleSet) -> float:
    """``min_{z in set} <w, z>`` in closed form."""
    if isinstance(feasible, Box):
        return float(np.sum(np.minimum(w * feasible.lower, w * feasible.upper)))
    if isinstance(feasible, Ball):
        return float(w @ feasible.center) - feasible.radius * float(np.linalg.norm(w))
    if isinstance(feasible, Simplex):
        return feasible.scale * float(np.min(w))
    raise UnsupportedProxError(f"no linear minimisation for {type(feasible).__name__}")


def variational_slack(point, eta, center, gamma, feasible, composite, z=None) -> float:
    """Certified slack of the prox optimality inequality at ``point``.

    Returns ``max(0, -min_z <eta + (point - center)/gamma + s, z - point>)``
    minimised over the whole set (or over the supplied test points ``z``).
    """
    point = np.asarray(point, dtype=float)
    v = np.asarray(eta, dtype=float) + (point - np.asarray(center, dtype=float)) / gamma
    w = v + _subgradient(point, v, composite, feasible)
    if z is None:
        worst = _min_linear(w, feasible) - float(w @ point)
    else:
        worst = float(np.min((np.atleast_2d(z) - point) @ w))
    return max(0.0, -worst)
