"""Experiment orchestration: config ingestion, runs, reports and scaling sweeps.

Configs are INI files with three sections::

    [problem]
    generator = bilinear          ; bilinear | spread-spectrum | decoupled
    dim_x = 10
    dim_y = 10
    degree_q = 2
    sigma = 1.0
    phi = sin-quadratic           ; zero | sin-quadratic
    feasible = box                ; box | ball | simplex
    box_halfwidth = 1.0
    composite = zero              ; zero | l1 | quadratic
    x0 = random                   ; random | center | comma separated values

    [solver]
    epsilon = 1e-3
    l0 = 1.0

    [report]
    output_dir = runs/example
    seed = 0

``UCSADDLE_OUTPUT_ROOT`` relocates relative output directories.
"""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .agm import AgmConfig, SolverTrace, agm_solve
from .complexity import affine_log_fit, loglog_fit, predicted_outer_complexity
from .inner import (FastGradientBase, RateCertificate, SaddleInnerObjective, SyntheticBase,
                    certify_distance, restarted_solve)
from .oracle import (InexactOracle, gradient_identity_error, holder_constant_g,
                     sample_feasible_pairs, validate_value_function)
from .problem import (Ball, Box, CompositeTerm, HolderSpec, ProblemError, SaddleProblem,
                      Simplex, SmoothField, UniformConvexitySpec, ValidationReport, CheckResult,
                      load_matrix, make_bilinear_coupling, sin_quadratic_field, spread_spectrum_problem,
                      validate_holder, validate_uniform_convexity, with_overrides)

CSV_COLUMNS = ("k", "M_k", "doublings", "delta_ck", "step_norm", "stationarity",
               "oracle_value", "inner_iters")
OUTPUT_ROOT_ENV = "UCSADDLE_OUTPUT_ROOT"


class ConfigError(ProblemError):
    pass


# ---------------------------------------------------------------------------
# config


@dataclass
class RunConfig:
    problem: dict = field(default_factory=dict)
    solver: dict = field(default_factory=dict)
    report: dict = field(default_factory=dict)
    source: Optional[str] = None

    @property
    def seed(self) -> int:
        return int(self.report.get("seed", 0))

    def get(self, section: str, key: str, default=None):
        return getattr(self, section).get(key, default)


_KNOWN = {
    "problem": {"generator", "dim_x", "dim_y", "degree_q", "sigma", "phi", "phi_amp_scale",
                "matrix_file", "feasible", "box_halfwidth", "box_lower", "box_upper",
                "ball_radius", "simplex_scale", "composite", "composite_weight", "x0",
                "lambda_min", "declared_sigma_q", "declared_l_xy", "declared_l_xx",
                "coupling_scale"},
    "solver": {"epsilon", "l0", "max_outer_iterations", "max_doublings",
               "stationarity", "inner_base", "max_restarts", "max_inner_iterations",
               "warm_start"},
    "report": {"output_dir", "seed", "trace"},
}


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    cfg = RunConfig(source=str(path))
    for section in parser.sections():
        if section not in _KNOWN:
            raise ConfigError(f"unknown config section [{section}]")
        unknown = set(parser[section]) - _KNOWN[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        values = dict(parser[section])
        if section == "problem" and "matrix_file" in values:
            mf = Path(values["matrix_file"])
            if not mf.is_absolute():
                values["matrix_file"] = str(Path(path).parent / mf)
        getattr(cfg, section).update(values)
    return cfg


def config_from_dict(problem=None, solver=None, report=None) -> RunConfig:
    as_str = lambda d: {k: str(v) for k, v in (d or {}).items()}
    return RunConfig(as_str(problem), as_str(solver), as_str(report))


def _f(cfg: dict, key: str, default: float) -> float:
    try:
        return float(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from exc


def _i(cfg: dict, key: str, default: int) -> int:
    try:
        return int(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key} must be an integer, got {cfg[key]!r}") from exc


def _b(cfg: dict, key: str, default: bool) -> bool:
    raw = str(cfg.get(key, default)).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {raw!r}")


# ---------------------------------------------------------------------------
# problem construction


def _feasible(pc: dict, dim: int):
    kind = pc.get("feasible", "box")
    if kind == "box":
        if "box_lower" in pc or "box_upper" in pc:
            lo = [float(t) for t in pc.get("box_lower", "").split(",") if t.strip()]
            hi = [float(t) for t in pc.get("box_upper", "").split(",") if t.strip()]
            if len(lo) == 1:
                lo = lo * dim
            if len(hi) == 1:
                hi = hi * dim
            if len(lo) != dim or len(hi) != dim:
                raise ConfigError(f"box bounds must have 1 or {dim} entries")
            return Box(np.array(lo), np.array(hi))
        hw = _f(pc, "box_halfwidth", 1.0)
        return Box.cube(dim, -hw, hw)
    if kind == "ball":
        return Ball(np.zeros(dim), _f(pc, "ball_radius", 1.0))
    if kind == "simplex":
        return Simplex(dim, _f(pc, "simplex_scale", 1.0))
    raise ConfigError(f"unknown feasible set {kind!r}")


def build_problem(cfg: RunConfig):
    """``(problem, x0)`` from the ``[problem]`` section."""
    pc = cfg.problem
    rng = np.random.default_rng(cfg.seed)
    gen = pc.get("generator", "bilinear")
    composite = CompositeTerm(pc.get("composite", "zero"), _f(pc, "composite_weight", 0.0))
    if gen == "spread-spectrum":
        problem, x0 = spread_spectrum_problem(
            _i(pc, "dim_x", 30), _f(pc, "lambda_min", 1e-5), _f(pc, "box_halfwidth", 400.0),
            _f(pc, "sigma", 1.0), _f(pc, "coupling_scale", 0.5), composite)
        if pc.get("x0", "equal-energy") != "equal-energy":
            x0 = _start_point(pc, problem, rng)
    elif gen in ("bilinear", "decoupled"):
        dim_x = _i(pc, "dim_x", 10)
        dim_y = _i(pc, "dim_y", dim_x)
        if "matrix_file" in pc:
            try:
                a = load_matrix(pc["matrix_file"])
            except OSError as exc:
                raise ConfigError(f"cannot read matrix file: {exc}") from exc
            if a.shape != (dim_y, dim_x):
                raise ConfigError(f"matrix file is {a.shape[0]}x{a.shape[1]}, "
                                  f"config declares {dim_y}x{dim_x}")
        elif gen == "decoupled":
            a = np.zeros((dim_y, dim_x))
        else:
            a = _f(pc, "coupling_scale", 1.0) * rng.standard_normal((dim_y, dim_x)) / math.sqrt(dim_x)
        phi_kind = pc.get("phi", "sin-quadratic")
        if phi_kind == "zero":
            phi = SmoothField(dim_x)
        elif phi_kind == "sin-quadratic":
            phi = sin_quadratic_field(dim_x, rng, _f(pc, "phi_amp_scale", 0.5))
        else:
            raise ConfigError(f"unknown phi {phi_kind!r}")
        problem = make_bilinear_coupling(dim_x, dim_y, a, phi, _f(pc, "sigma", 1.0),
                                         _f(pc, "degree_q", 2.0), _feasible(pc, dim_x),
                                         composite, name=gen)
        x0 = _start_point(pc, problem, rng)
    else:
        raise ConfigError(f"unknown generator {gen!r}")

    holder_kw = {}
    if "declared_l_xy" in pc:
        holder_kw["l_xy"] = _f(pc, "declared_l_xy", 0.0)
    if "declared_l_xx" in pc:
        holder_kw["l_xx"] = _f(pc, "declared_l_xx", 0.0)
    holder = None
    if holder_kw:
        h = problem.holder
        holder = HolderSpec(h.order_p, h.exponent_nu, holder_kw.get("l_xx", h.l_xx),
                            holder_kw.get("l_xy", h.l_xy), h.l_yx, h.l_yy)
    uniform = None
    if "declared_sigma_q" in pc:
        uniform = UniformConvexitySpec(problem.uniform.degree_q, _f(pc, "declared_sigma_q", 1.0))
    if holder or uniform:
        problem = with_overrides(problem, holder, uniform)
    return problem, x0


def _start_point(pc: dict, problem: SaddleProblem, rng) -> np.ndarray:
    spec = pc.get("x0", "random")
    feas = problem.feasible_x
    if spec == "random":
        return sample_feasible_pairs(problem, rng, 1)[0]
    if spec == "center":
        if isinstance(feas, Box):
            return 0.5 * (feas.lower + feas.upper)
        if isinstance(feas, Ball):
            return feas.center.copy()
        return np.full(feas.dim, feas.scale / feas.dim)
    try:
        x0 = np.array([float(t) for t in spec.split(",")])
    except ValueError as exc:
        raise ConfigError(f"cannot parse x0 {spec!r}") from exc
    if x0.size != problem.dim_x:
        raise ConfigError(f"x0 has {x0.size} entries, problem has dim_x = {problem.dim_x}")
    return x0


def build_agm_config(cfg: RunConfig) -> AgmConfig:
    sc = cfg.solver
    return AgmConfig(epsilon=_f(sc, "epsilon", 1e-3), l0=_f(sc, "l0", 1.0),
                     max_outer_iterations=_i(sc, "max_outer_iterations", 10_000),
                     max_doublings_per_iteration=_i(sc, "max_doublings", 60),
                     stationarity_convention=sc.get("stationarity", "norm-squared"))


def build_oracle(cfg: RunConfig, problem: SaddleProblem) -> InexactOracle:
    sc = cfg.solver
    return InexactOracle(problem, base=sc.get("inner_base", "fast-gradient"),
                         max_restarts=_i(sc, "max_restarts", 200),
                         max_iterations=_i(sc, "max_inner_iterations", 200_000))


# ---------------------------------------------------------------------------
# reporting


def output_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.report.get("output_dir", "runs/latest"))
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not out.is_absolute():
        out = Path(root) / out
    return out


def trace_csv(trace: SolverTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in trace.records:
        writer.writerow([r.k, repr(r.m_k), r.doublings, repr(r.delta_ck), repr(r.step_norm),
                         repr(r.stationarity_measure), repr(r.oracle_value), r.inner_iterations])
    return buf.getvalue()


@dataclass
class RunReport:
    config: dict
    seed: int
    converged: bool
    final_point: list
    final_stationarity: float
    g_value: float
    g_value_source: str
    outer_iterations: int
    first_order_calls: int
    inner_iterations: int
    wall_time_s: float
    csv_path: Optional[str]
    predicted_outer_complexity: Optional[float] = None
    backend: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def run_solve(cfg: RunConfig, write: bool = True):
    """Build, solve, and (optionally) write ``trace.csv`` and ``report.json``.

    Returns ``(report, trace)``.
    """
    from .kernels import BACKEND

    problem, x0 = build_problem(cfg)
    config = build_agm_config(cfg)
    oracle = build_oracle(cfg, problem)
    use_warm = _b(cfg.solver, "warm_start", True)
    call = oracle if use_warm else (lambda x, d, w=None: oracle(x, d, None))
    t0 = time.perf_counter()
    trace = agm_solve(problem, call, config, x0)
    wall = time.perf_counter() - t0

    xout = trace.output_point
    if problem.analytic is not None:
        g_val, src = problem.analytic.g_exact(xout), "analytic"
    else:
        g_val, src = oracle(xout, config.epsilon / 20.0).value, "oracle"
    predicted = None
    if trace.records:
        consts = holder_constant_g(problem.holder, problem.uniform,
                                   problem.feasible_x.diameter_d0)
        best_val = min(r.oracle_value for r in trace.records) + min(
            problem.composite(x) for x in trace.points)
        delta = trace.records[0].oracle_value + problem.composite(x0) - best_val
        if delta > 0 and consts.l_nu_g > 0:
            predicted = predicted_outer_complexity(consts, delta, config.epsilon)

    csv_path = None
    if write:
        out = output_dir(cfg)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = str(out / "trace.csv")
        with open(csv_path, "w", newline="") as fh:
            fh.write(trace_csv(trace))
    report = RunReport(
        config={"problem": cfg.problem, "solver": cfg.solver, "report": cfg.report},
        seed=cfg.seed, converged=trace.converged,
        final_point=[float(v) for v in xout],
        final_stationarity=trace.best_stationarity,
        g_value=float(g_val), g_value_source=src,
        outer_iterations=len(trace.records),
        first_order_calls=trace.total_first_order_calls,
        inner_iterations=trace.total_inner_iterations,
        wall_time_s=wall, csv_path=csv_path,
        predicted_outer_complexity=predicted, backend=BACKEND)
    if write:
        with open(output_dir(cfg) / "report.json", "w") as fh:
            fh.write(report.to_json() + "\n")
    return report, trace


def run_validate(cfg: RunConfig, samples: int = 500) -> ValidationReport:
    problem, _ = build_problem(cfg)
    seed = cfg.seed
    report = validate_holder(problem, samples, seed)
    report.extend(validate_uniform_convexity(problem, samples, seed))
    if problem.analytic is not None and problem.holder.exponent_nu > 0:
        report.extend(validate_value_function(problem, samples, seed))
        if problem.uniform.degree_q == 2.0:
            rng = np.random.default_rng(seed)
            xs = sample_feasible_pairs(problem, rng, 20)
            worst = max(gradient_identity_error(problem, x) for x in xs)
            report.checks.append(CheckResult("gradient_identity", 1e-5, worst, worst <= 1e-5,
                                             "relative error vs central differences"))
    return report


def run_scaling(cfg: RunConfig, sweep: str, grid) -> dict:
    """Sweep ``epsilon`` (outer) or ``target_gap`` (inner) and fit the scaling law."""
    grid = [float(v) for v in grid]
    if len(grid) < 4:
        raise ConfigError(f"scaling sweep needs at least 4 grid points, got {len(grid)}")
    rows = []
    if sweep == "epsilon":
        for eps in grid:
            sub = RunConfig(dict(cfg.problem), dict(cfg.solver, epsilon=str(eps)), dict(cfg.report))
            try:
                rep, _ = run_solve(sub, write=False)
            except (RuntimeError, ProblemError) as exc:
                rows.append(dict(value=eps, ok=False, error=str(exc)))
                continue
            rows.append(dict(value=eps, ok=rep.converged, outer_iterations=rep.outer_iterations,
                             first_order_calls=rep.first_order_calls,
                             inner_iterations=rep.inner_iterations))
        good = [r for r in rows if r["ok"]]
        if len(good) < 4:
            raise ConfigError(f"only {len(good)} successful runs in the sweep (need 4)")
        fit = loglog_fit([1.0 / r["value"] for r in good], [r["outer_iterations"] for r in good])
        law = "log10(outer_iterations) ~ slope * log10(1/epsilon)"
    elif sweep == "target_gap":
        problem, x0 = build_problem(cfg)
        for tgt in grid:
            try:
                sol = inner_solve_at(problem, x0, tgt, cfg.solver.get("inner_base", "synthetic"))
            except (RuntimeError, ProblemError) as exc:
                rows.append(dict(value=tgt, ok=False, error=str(exc)))
                continue
            rows.append(dict(value=tgt, ok=True, restarts=sol.restarts_used,
                             iterations=sol.iterations_used, gap_bound=sol.gap_bound))
        good = [r for r in rows if r["ok"]]
        if len(good) < 4:
            raise ConfigError(f"only {len(good)} successful runs in the sweep (need 4)")
        fit = affine_log_fit([1.0 / r["value"] for r in good], [r["restarts"] for r in good])
        law = "restarts ~ slope * log2(1/target_gap) + intercept"
    else:
        raise ConfigError(f"unknown sweep parameter {sweep!r} (epsilon | target_gap)")
    return dict(sweep=sweep, law=law, runs=rows, **fit)


def inner_solve_at(problem: SaddleProblem, x, target_gap: float, base_name: str = "synthetic"):
    """One restarted inner solve at fixed ``x`` from ``y = 0``."""
    objective = SaddleInnerObjective(problem, x)
    start = np.zeros(problem.dim_y)
    _, g0 = objective.value_grad(start)
    radius = max(certify_distance(g0, problem.uniform), 1e-12)
    if base_name == "synthetic":
        if problem.analytic is None:
            raise ConfigError("synthetic inner base needs an analytic problem")
        q = problem.uniform.degree_q
        base = SyntheticBase(problem.analytic.y_star(objective.x), RateCertificate(4.0, 2.0, q))
    elif base_name == "fast-gradient":
        from .oracle import inner_smoothness
        base = FastGradientBase(inner_smoothness(problem, start, radius))
    else:
        raise ConfigError(f"unknown inner base {base_name!r}")
    return restarted_solve(objective, base, problem.uniform, start, radius, target_gap)
