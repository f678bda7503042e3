"""Saddle point problem model.

A problem is ``min_{x in X} max_y  F(x, y) - h(y) + r(x)`` with ``X`` compact
convex, ``h`` uniformly convex and ``r`` a simple convex term. The module
also ships the bilinear-coupling generator

    F(x, y) = phi(x) + <A x, y>,    h(y) = (sigma / q) |y|^q

whose inner maximiser, value function and its gradient are known in closed
form, plus sampled validators for the declared smoothness constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

FEAS_TOL = 1e-9


class ProblemError(ValueError):
    """Raised for malformed problems, dimension mismatches and infeasible points."""


def as_vector(v, dim: Optional[int] = None, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ProblemError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ProblemError(f"{name} has dimension {arr.size}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ProblemError(f"{name} has non-finite coordinates")
    return arr


# ---------------------------------------------------------------------------
# smoothness / convexity metadata


@dataclass(frozen=True)
class HolderSpec:
    """Hölder constants of the ``p``-th derivatives of ``F``."""

    order_p: int = 1
    exponent_nu: float = 1.0
    l_xx: float = 0.0
    l_xy: float = 0.0
    l_yx: float = 0.0
    l_yy: float = 0.0

    def __post_init__(self):
        if int(self.order_p) != self.order_p or self.order_p < 1:
            raise ProblemError(f"order_p must be a positive integer, got {self.order_p}")
        if not 0.0 <= self.exponent_nu <= 1.0:
            raise ProblemError(f"exponent_nu must lie in [0, 1], got {self.exponent_nu}")
        for name in ("l_xx", "l_xy", "l_yx", "l_yy"):
            val = getattr(self, name)
            if not (val >= 0.0 and math.isfinite(val)):
                raise ProblemError(f"{name} must be finite and nonnegative, got {val}")


@dataclass(frozen=True)
class UniformConvexitySpec:
    degree_q: float = 2.0
    sigma_q: float = 1.0

    def __post_init__(self):
        if not self.degree_q >= 2.0:
            raise ProblemError(f"degree_q must be >= 2, got {self.degree_q}")
        if not (self.sigma_q > 0.0 and math.isfinite(self.sigma_q)):
            raise ProblemError(f"sigma_q must be positive, got {self.sigma_q}")


# ---------------------------------------------------------------------------
# feasible sets


class FeasibleSet:
    """Compact convex set with a closed-form Euclidean diameter."""

    dim: int
    diameter_d0: float

    def violation(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def contains(self, x, tol: float = FEAS_TOL) -> bool:
        return self.violation(np.asarray(x, dtype=float)) <= tol

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw ``n`` points of the set, shape ``(n, dim)``."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Box(FeasibleSet):
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lower, name="lower")
        hi = as_vector(self.upper, dim=lo.size, name="upper")
        if np.any(hi < lo):
            raise ProblemError("box upper bound below lower bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dim: int, lo: float, hi: float) -> "Box":
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def diameter_d0(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def violation(self, x):
        return float(max(np.max(self.lower - x, initial=0.0),
                         np.max(x - self.upper, initial=0.0)))

    def sample(self, rng, n):
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))


@dataclass(frozen=True, eq=False)
class Ball(FeasibleSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, name="center"))
        if not self.radius > 0:
            raise ProblemError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def diameter_d0(self) -> float:
        return 2.0 * float(self.radius)

    def violation(self, x):
        return max(float(np.linalg.norm(x - self.center)) - self.radius, 0.0)

    def sample(self, rng, n):
        d = rng.standard_normal((n, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        rad = self.radius * rng.uniform(size=(n, 1)) ** (1.0 / self.dim)
        return self.center + rad * d


@dataclass(frozen=True)
class Simplex(FeasibleSet):
    """``{x >= 0, sum(x) = scale}``."""

    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.dim < 2:
            raise ProblemError("simplex needs dimension >= 2 (a point has no diameter)")
        if not self.scale > 0:
            raise ProblemError(f"simplex scale must be positive, got {self.scale}")

    @property
    def diameter_d0(self) -> float:
        return math.sqrt(2.0) * float(self.scale)

    def violation(self, x):
        return float(max(np.max(-x, initial=0.0), abs(float(np.sum(x)) - self.scale)))

    def sample(self, rng, n):
        return self.scale * rng.dirichlet(np.ones(self.dim), size=n)


# ---------------------------------------------------------------------------
# composite terms r(x)


@dataclass(frozen=True)
class CompositeTerm:
    """``r(x)``: ``zero``, ``l1`` (``weight * |x|_1``) or ``quadratic`` (``weight/2 |x|^2``)."""

    kind: str = "zero"
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "l1", "quadratic"):
            raise ProblemError(f"unknown composite term {self.kind!r}")
        if not self.weight >= 0.0:
            raise ProblemError(f"composite weight must be nonnegative, got {self.weight}")

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "l1":
            return self.weight * float(np.sum(np.abs(x)))
        if self.kind == "quadratic":
            return 0.5 * self.weight * float(x @ x)
        return 0.0


# ---------------------------------------------------------------------------
# smooth fields phi(x)


@dataclass(frozen=True, eq=False)
class SmoothField:
    """``phi(x) = sum_i a_i sin(b_i x_i) + 1/2 x'Qx + c'x``.

    Any of the parts may be absent. ``lipschitz`` is a certified bound on the
    Lipschitz constant of the gradient: ``|Q|_2 + max_i |a_i| b_i^2``.
    """

    dim: int
    amp: Optional[np.ndarray] = None
    freq: Optional[np.ndarray] = None
    quad: Optional[np.ndarray] = None
    lin: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.dim
        if (self.amp is None) != (self.freq is None):
            raise ProblemError("sin amplitudes and frequencies must be given together")
        if self.amp is not None:
            object.__setattr__(self, "amp", as_vector(self.amp, n, "amp"))
            object.__setattr__(self, "freq", as_vector(self.freq, n, "freq"))
        if self.quad is not None:
            q = np.asarray(self.quad, dtype=float)
            if q.shape != (n, n):
                raise ProblemError(f"quadratic part must be {n}x{n}, got {q.shape}")
            object.__setattr__(self, "quad", 0.5 * (q + q.T))
        if self.lin is not None:
            object.__setattr__(self, "lin", as_vector(self.lin, n, "lin"))

    def __call__(self, x) -> float:
        val = 0.0
        if self.amp is not None:
            val += float(np.sum(self.amp * np.sin(self.freq * x)))
        if self.quad is not None:
            val += 0.5 * float(x @ self.quad @ x)
        if self.lin is not None:
            val += float(self.lin @ x)
        return val

    def gradient(self, x) -> np.ndarray:
        g = np.zeros(self.dim)
        if self.amp is not None:
            g += self.amp * self.freq * np.cos(self.freq * x)
        if self.quad is not None:
            g += self.quad @ x
        if self.lin is not None:
            g += self.lin
        return g

    @property
    def lipschitz(self) -> float:
        lip = 0.0
        if self.quad is not None:
            lip += float(np.linalg.norm(self.quad, 2))
        if self.amp is not None:
            lip += float(np.max(np.abs(self.amp) * self.freq ** 2))
        return lip


def zero_field(dim: int) -> SmoothField:
    return SmoothField(dim)


def sin_quadratic_field(dim: int, rng: np.random.Generator, amp_scale: float = 0.5,
                        eig_range=(-1.0, 2.0)) -> SmoothField:
    """Random non-convex field: sines plus an indefinite quadratic.

    The quadratic has eigenvalues spread uniformly over ``eig_range``
    (at least one negative when the range starts below zero) in a random
    orthonormal basis.
    """
    eigs = np.linspace(eig_range[0], eig_range[1], dim)
    basis, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    quad = basis @ np.diag(eigs) @ basis.T
    amp = amp_scale * rng.uniform(0.5, 1.0, dim)
    freq = rng.uniform(0.5, 1.5, dim)
    return SmoothField(dim, amp=amp, freq=freq, quad=quad)


# ---------------------------------------------------------------------------
# the problem


@dataclass(frozen=True, eq=False)
class AnalyticSolution:
    y_star: Callable[[np.ndarray], np.ndarray]
    g_exact: Callable[[np.ndarray], float]
    grad_g_exact: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PowerCoupling:
    """Structure of the generator family, exposed for compiled inner solves."""

    matrix_a: np.ndarray
    sigma: float
    degree_q: float
    phi: SmoothField


@dataclass(frozen=True, eq=False)
class SaddleProblem:
    dim_x: int
    dim_y: int
    eval_f: Callable[[np.ndarray, np.ndarray], float]
    grad_f_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    grad_f_y: Callable[[np.ndarray, np.ndarray], np.ndarray]
    eval_h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    composite: CompositeTerm
    feasible_x: FeasibleSet
    holder: HolderSpec
    uniform: UniformConvexitySpec
    analytic: Optional[AnalyticSolution] = None
    # lower bound on the smallest Hessian eigenvalue of h over a ball (center, radius)
    h_curvature_floor: Optional[Callable[[np.ndarray, float], float]] = None
    coupling: Optional[PowerCoupling] = None
    name: str = "custom"

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_y < 1:
            raise ProblemError("dimensions must be positive")
        if self.feasible_x.dim != self.dim_x:
            raise ProblemError(
                f"feasible set has dimension {self.feasible_x.dim}, problem has {self.dim_x}")

    def check_x(self, x) -> np.ndarray:
        x = as_vector(x, self.dim_x, "x")
        viol = self.feasible_x.violation(x)
        if viol > FEAS_TOL:
            raise ProblemError(f"x is infeasible (violation {viol:.3e} > {FEAS_TOL:g})")
        return x

    def check_y(self, y) -> np.ndarray:
        return as_vector(y, self.dim_y, "y")


def eval_shat(problem: SaddleProblem, x, y) -> float:
    """``F(x, y) - h(y)`` with feasibility and dimension checks."""
    x = problem.check_x(x)
    y = problem.check_y(y)
    return float(problem.eval_f(x, y)) - float(problem.eval_h(y))


def eval_objective(problem: SaddleProblem, x, y) -> float:
    """Full saddle function ``F(x, y) - h(y) + r(x)``."""
    return eval_shat(problem, x, y) + problem.composite(x)


def make_bilinear_coupling(dim_x: int, dim_y: int, matrix_a, phi: Optional[SmoothField],
                           sigma: float, degree_q: float, feasible_x: FeasibleSet,
                           composite: Optional[CompositeTerm] = None,
                           name: str = "bilinear") -> SaddleProblem:
    """Generator ``F = phi(x) + <Ax, y>``, ``h = (sigma/q)|y|^q``.

    The inner maximiser is ``y*(x) = sigma^{-1/(q-1)} |Ax|^{(2-q)/(q-1)} Ax``
    and ``g(x) = phi(x) + (1 - 1/q) sigma^{-1/(q-1)} |Ax|^{q/(q-1)}``.
    """
    if not sigma > 0:
        raise ProblemError(f"sigma must be positive, got {sigma}")
    if not degree_q >= 2:
        raise ProblemError(f"degree_q must be >= 2, got {degree_q}")
    a = np.array(matrix_a, dtype=float)
    if a.shape != (dim_y, dim_x):
        raise ProblemError(f"matrix_a must be {dim_y}x{dim_x}, got {a.shape}")
    if phi is None:
        phi = zero_field(dim_x)
    if phi.dim != dim_x:
        raise ProblemError(f"phi has dimension {phi.dim}, expected {dim_x}")
    composite = composite or CompositeTerm()
    q = float(degree_q)
    sigma = float(sigma)
    s_inv = sigma ** (-1.0 / (q - 1.0))
    a_norm = float(np.linalg.norm(a, 2)) if a.size else 0.0

    def eval_f(x, y):
        return phi(x) + float((a @ x) @ y)

    def grad_f_x(x, y):
        return phi.gradient(x) + a.T @ y

    def grad_f_y(x, y):
        return a @ x

    def eval_h(y):
        return sigma / q * float(np.linalg.norm(y)) ** q

    def grad_h(y):
        nrm = float(np.linalg.norm(y))
        if q == 2.0:
            return sigma * y
        return sigma * nrm ** (q - 2.0) * y if nrm > 0 else np.zeros_like(y)

    def y_star(x):
        ax = a @ np.asarray(x, dtype=float)
        nrm = float(np.linalg.norm(ax))
        if nrm == 0.0:
            return np.zeros(dim_y)
        return s_inv * nrm ** ((2.0 - q) / (q - 1.0)) * ax

    def g_exact(x):
        x = np.asarray(x, dtype=float)
        nrm = float(np.linalg.norm(a @ x))
        return phi(x) + (1.0 - 1.0 / q) * s_inv * nrm ** (q / (q - 1.0))

    def grad_g_exact(x):
        x = np.asarray(x, dtype=float)
        return phi.gradient(x) + a.T @ y_star(x)

    def curvature_floor(center, radius):
        if q == 2.0:
            return sigma
        inner = float(np.linalg.norm(center)) - radius
        return sigma * inner ** (q - 2.0) if inner > 0 else 0.0

    return SaddleProblem(
        dim_x=dim_x, dim_y=dim_y,
        eval_f=eval_f, grad_f_x=grad_f_x, grad_f_y=grad_f_y,
        eval_h=eval_h, grad_h=grad_h,
        composite=composite, feasible_x=feasible_x,
        holder=HolderSpec(1, 1.0, l_xx=phi.lipschitz, l_xy=a_norm, l_yx=a_norm, l_yy=0.0),
        uniform=UniformConvexitySpec(q, sigma * 2.0 ** (2.0 - q)),
        analytic=AnalyticSolution(y_star, g_exact, grad_g_exact),
        h_curvature_floor=curvature_floor,
        coupling=PowerCoupling(a, sigma, q, phi),
        name=name,
    )


def spread_spectrum_problem(dim: int = 30, lambda_min: float = 1e-5, halfwidth: float = 400.0,
                            sigma: float = 1.0, coupling_scale: float = 0.5,
                            composite: Optional[CompositeTerm] = None):
    """Indefinite quadratic plus sines with a log-spaced curvature spectrum.

    The value function has Hessian eigenvalues spread over
    ``[lambda_min, 1]`` plus one negative direction, and the returned start
    point puts equal energy ``lambda_i x_i^2`` in every direction. Gradient
    methods then stay in their sublinear regime over many decades of
    accuracy instead of converging linearly.

    Returns ``(problem, x0)``.
    """
    lam = np.logspace(math.log10(lambda_min), 0.0, dim)
    alpha = coupling_scale * np.sqrt(lam)
    quad = np.diag(lam - alpha ** 2 / sigma)
    quad[0, 0] = -0.5
    phi = SmoothField(dim, amp=0.01 * lam, freq=np.ones(dim), quad=quad)
    problem = make_bilinear_coupling(dim, dim, np.diag(alpha), phi, sigma, 2.0,
                                     Box.cube(dim, -halfwidth, halfwidth), composite,
                                     name="spread-spectrum")
    x0 = np.clip(0.99 / np.sqrt(lam), -0.99 * halfwidth, 0.99 * halfwidth)
    return problem, x0


def with_overrides(problem: SaddleProblem, holder: Optional[HolderSpec] = None,
                   uniform: Optional[UniformConvexitySpec] = None) -> SaddleProblem:
    """Copy of ``problem`` with replaced declared constants (for validator tests)."""
    from dataclasses import replace
    kw = {}
    if holder is not None:
        kw["holder"] = holder
    if uniform is not None:
        kw["uniform"] = uniform
    return replace(problem, **kw)


# ---------------------------------------------------------------------------
# validators


@dataclass
class CheckResult:
    name: str
    declared: float
    empirical: float
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def extend(self, other: "ValidationReport") -> "ValidationReport":
        self.checks.extend(other.checks)
        return self

    def table(self) -> str:
        lines = [f"{'check':<28} {'declared':>14} {'empirical':>14}  result"]
        for c in self.checks:
            lines.append(f"{c.name:<28} {c.declared:>14.6g} {c.empirical:>14.6g}  "
                         f"{'PASS' if c.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "checks": [dict(name=c.name, declared=c.declared, empirical=c.empirical,
                                passed=c.passed, detail=c.detail) for c in self.checks]}


def _sample_ball(rng, n, dim, radius):
    d = rng.standard_normal((n, dim))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return radius * rng.uniform(size=(n, 1)) ** (1.0 / dim) * d


def validate_holder(problem: SaddleProblem, samples: int = 200, rng_seed: int = 0,
                    y_radius: float = 5.0, slack: float = 0.01) -> ValidationReport:
    """Sampled maxima of the four first-derivative Hölder ratios.

    A check fails when its empirical ratio exceeds the declared constant by
    more than ``slack`` (relative).
    """
    if samples < 2:
        raise ProblemError("validate_holder needs at least 2 samples")
    rng = np.random.default_rng(rng_seed)
    nu = problem.holder.exponent_nu
    xs = problem.feasible_x.sample(rng, 2 * samples)
    ys = _sample_ball(rng, 2 * samples, problem.dim_y, y_radius)
    ratios = dict(l_xx=0.0, l_xy=0.0, l_yx=0.0, l_yy=0.0)
    for i in range(samples):
        x, x2 = xs[2 * i], xs[2 * i + 1]
        y, y2 = ys[2 * i], ys[2 * i + 1]
        dx = float(np.linalg.norm(x - x2))
        dy = float(np.linalg.norm(y - y2))
        if dx >= 1e-12:
            den = dx ** nu
            ratios["l_xx"] = max(ratios["l_xx"], float(np.linalg.norm(
                problem.grad_f_x(x, y) - problem.grad_f_x(x2, y))) / den)
            ratios["l_yx"] = max(ratios["l_yx"], float(np.linalg.norm(
                problem.grad_f_y(x, y) - problem.grad_f_y(x2, y))) / den)
        if dy >= 1e-12:
            den = dy ** nu
            ratios["l_xy"] = max(ratios["l_xy"], float(np.linalg.norm(
                problem.grad_f_x(x, y) - problem.grad_f_x(x, y2))) / den)
            ratios["l_yy"] = max(ratios["l_yy"], float(np.linalg.norm(
                problem.grad_f_y(x, y) - problem.grad_f_y(x, y2))) / den)
    report = ValidationReport()
    for name, emp in ratios.items():
        declared = getattr(problem.holder, name)
        ok = emp <= declared * (1.0 + slack) + 1e-12
        report.checks.append(CheckResult(f"holder_{name}", declared, emp, ok))
    return report


def validate_uniform_convexity(problem: SaddleProblem, samples: int = 200,
                               rng_seed: int = 0, y_radius: float = 5.0,
                               tol: float = 1e-9) -> ValidationReport:
    """Sampled check of ``h(y') >= h(y) + <grad h(y), y'-y> + (sigma_q/q)|y'-y|^q``."""
    if samples < 2:
        raise ProblemError("validate_uniform_convexity needs at least 2 samples")
    rng = np.random.default_rng(rng_seed)
    q, sig = problem.uniform.degree_q, problem.uniform.sigma_q
    ys = _sample_ball(rng, 2 * samples, problem.dim_y, y_radius)
    worst = 0.0
    for i in range(samples):
        y, y2 = ys[2 * i], ys[2 * i + 1]
        d = y2 - y
        lower = (problem.eval_h(y) + float(problem.grad_h(y) @ d)
                 + sig / q * float(np.linalg.norm(d)) ** q)
        worst = max(worst, lower - problem.eval_h(y2))
    return ValidationReport([CheckResult("uniform_convexity", sig, worst, worst <= tol,
                                         "max violation of the lower model")])


# ---------------------------------------------------------------------------
# dense matrix text format


def load_matrix(path) -> np.ndarray:
    """Read ``rows cols`` on the first line, then row-major decimals."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ProblemError(f"{path}: first line must be 'rows cols'")
        rows, cols = int(header[0]), int(header[1])
        data = fh.read().split()
    if len(data) != rows * cols:
        raise ProblemError(f"{path}: expected {rows * cols} entries, found {len(data)}")
    return np.array([float(t) for t in data]).reshape(rows, cols)


def save_matrix(path, matrix) -> None:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
