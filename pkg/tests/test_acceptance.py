"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import filecmp
import math
import time
from pathlib import Path

import numpy as np
import pytest

from ucsaddle.agm import AgmConfig, agm_solve
from ucsaddle.complexity import affine_log_fit, loglog_fit
from ucsaddle.harness import load_config, run_solve
from ucsaddle.inner import (RateCertificate, SaddleInnerObjective, certify_distance,
                            compute_schedule, make_synthetic_base, restarted_solve)
from ucsaddle.oracle import (InexactOracle, gradient_identity_error, sample_feasible_pairs,
                             validate_value_function)
from ucsaddle.problem import (Ball, Box, CompositeTerm, Simplex, UniformConvexitySpec,
                              spread_spectrum_problem)
from ucsaddle.prox import composite_prox, variational_slack

from conftest import bilinear

CONFIGS = Path(__file__).parent.parent / "configs"


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail, elapsed=None):
        timing = f" [{elapsed:.2f}s]" if elapsed is not None else ""
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {title}: {'PASS' if ok else 'FAIL'}{timing} {detail}")
        assert ok, detail
    return emit


def test_1_oracle_correctness(verdict):
    t0 = time.perf_counter()
    worst_value = worst_model = -math.inf
    for q in (2.0, 3.0, 4.0):
        p = bilinear(q, dim=10, seed=int(q))
        oracle = InexactOracle(p)
        rng = np.random.default_rng(100 + int(q))
        xs = p.feasible_x.sample(rng, 100)
        for x in xs:
            delta = 10.0 ** rng.uniform(-8, -2)
            r = oracle(x, delta)
            g = p.analytic.g_exact
            worst_value = max(worst_value, abs(r.value - g(x)) / delta)
            zs = p.feasible_x.sample(rng, 100)
            d = zs - x
            upper = (r.value + d @ r.gradient + 0.5 * r.l_of_delta * np.sum(d * d, axis=1)
                     + delta + 1e-9)
            worst_model = max(worst_model, max(g(z) - u for z, u in zip(zs, upper)))
    elapsed = time.perf_counter() - t0
    ok = worst_value <= 1.0 and worst_model <= 0.0 and elapsed < 30
    verdict(1, "oracle correctness", ok,
            f"max |value-g|/delta={worst_value:.2e}, max model excess={worst_model:.2e}", elapsed)


def test_2_value_function_constants(verdict):
    t0 = time.perf_counter()
    details, ok = [], True
    for q in (2.0, 3.0, 4.0):
        rep = validate_value_function(bilinear(q, seed=int(q)), samples=1000, slack=1e-6)
        ok &= rep.passed
        details.append(f"q={q:g}: y* {rep['y_star_holder'].empirical / rep['y_star_holder'].declared:.3f}, "
                       f"grad g {rep['grad_g_holder'].empirical / rep['grad_g_holder'].declared:.3f}")
    elapsed = time.perf_counter() - t0
    verdict(2, "value-function Holder constants", ok and elapsed < 10,
            "ratio empirical/declared " + "; ".join(details), elapsed)


def test_3_gradient_identity(verdict):
    t0 = time.perf_counter()
    p = bilinear(2.0)
    xs = sample_feasible_pairs(p, np.random.default_rng(3), 50)
    worst = max(gradient_identity_error(p, x) for x in xs)
    elapsed = time.perf_counter() - t0
    verdict(3, "gradient identity", worst <= 1e-5 and elapsed < 5,
            f"max relative error {worst:.2e}", elapsed)


def test_4_schedule_examples(verdict):
    flat = compute_schedule(RateCertificate(4, 2, 2), UniformConvexitySpec(2, 1), 3.7)
    decay = compute_schedule(RateCertificate(1, 2, 3), UniformConvexitySpec(2, 1), 1.0)
    ok = (flat.m0 == 6 and math.isinf(flat.k0) and flat.budgets(10) == [6] * 10
          and decay.m0 == 3 and decay.k0 == 2 and decay.budgets(4) == [3, 3, 1, 1])
    verdict(4, "restart schedule arithmetic", ok,
            f"flat m0={flat.m0} k0={flat.k0}; decaying m0={decay.m0} k0={decay.k0} "
            f"budgets={decay.budgets(4)}")


def test_5_synthetic_restarts(verdict):
    t0 = time.perf_counter()
    p = bilinear(2.0, dim=10, seed=5)
    x = p.feasible_x.sample(np.random.default_rng(5), 1)[0]
    objective = SaddleInnerObjective(p, x)
    y_star = p.analytic.y_star(x)
    start = np.zeros(p.dim_y)
    radius = certify_distance(objective.gradient(start), p.uniform)
    base = make_synthetic_base(y_star, RateCertificate(4.0, 2.0, 2.0))
    targets = [10.0 ** -k for k in range(1, 8)]
    restarts, worst_ratio = [], 0.0
    for tgt in targets:
        sol = restarted_solve(objective, base, p.uniform, start, radius, tgt, record=True)
        assert sol.gap_bound <= tgt
        restarts.append(sol.restarts_used)
        dists = [np.linalg.norm(h["point"] - y_star) for h in sol.history]
        worst_ratio = max([worst_ratio] + [b / a for a, b in zip(dists, dists[1:]) if a > 0])
    fit = affine_log_fit([1.0 / t for t in targets], restarts)
    elapsed = time.perf_counter() - t0
    ok = fit["r2"] >= 0.95 and worst_ratio <= 0.5 and elapsed < 5
    verdict(5, "restart scaling", ok,
            f"restarts={restarts} R2={fit['r2']:.4f} max contraction={worst_ratio:.4f}", elapsed)


def test_6_outer_scaling(verdict):
    t0 = time.perf_counter()
    p, x0 = spread_spectrum_problem(30, 1e-5, 400.0)
    grid = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
    iterations, worst_excess = [], -math.inf
    for eps in grid:
        oracle = InexactOracle(p)
        trace = agm_solve(p, oracle, AgmConfig(epsilon=eps, l0=1.0,
                                               max_outer_iterations=200_000), x0)
        assert trace.converged
        iterations.append(len(trace.records))
        worst_excess = max(worst_excess,
                           max(r.m_k - 2.0 * r.l_of_delta for r in trace.records))
    fit = loglog_fit([1.0 / e for e in grid], iterations)
    elapsed = time.perf_counter() - t0
    ok = abs(fit["slope"] - 1.0) <= 0.3 and worst_excess <= 1e-9 and elapsed < 120
    verdict(6, "outer complexity scaling", ok,
            f"iterations={iterations} slope={fit['slope']:.3f} R2={fit['r2']:.3f} "
            f"max(M_k - 2L)={worst_excess:.3g}", elapsed)


def test_7_end_to_end(verdict, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    monkeypatch.setenv("UCSADDLE_OUTPUT_ROOT", str(tmp_path))
    cfg = load_config(CONFIGS / "bilinear_q2.ini")
    assert float(cfg.solver["epsilon"]) == 1e-3 and cfg.problem["degree_q"] == "2"
    report, trace = run_solve(cfg)
    first_csv = Path(report.csv_path)
    rows = first_csv.read_text().splitlines()[1:]
    cols = [r.split(",") for r in rows]
    calls = sum(2 * (int(c[2]) + 1) for c in cols)
    inner = sum(int(c[7]) for c in cols)
    reconciled = (report.first_order_calls == calls == trace.total_first_order_calls
                  and report.inner_iterations == inner == trace.total_inner_iterations
                  and report.outer_iterations == len(rows))
    cfg.report["output_dir"] = cfg.report["output_dir"] + "_repeat"
    repeat, _ = run_solve(cfg)
    identical = filecmp.cmp(first_csv, repeat.csv_path, shallow=False)
    elapsed = time.perf_counter() - t0
    ok = (report.converged and report.final_stationarity <= 1e-3 and reconciled
          and identical and elapsed < 60)
    verdict(7, "end-to-end solve", ok,
            f"stationarity={report.final_stationarity:.2e} calls={report.first_order_calls} "
            f"inner={report.inner_iterations} reconciled={reconciled} identical_csv={identical}",
            elapsed)


def test_8_prox_oracles(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst_gap = 0.0
    ax = np.arange(-1.0, 1.0 + 5e-4, 1e-3)
    gx, gy = np.meshgrid(ax, ax)
    square = np.stack([gx.ravel(), gy.ravel()], axis=1)
    for comp in (CompositeTerm(), CompositeTerm("l1", 0.3), CompositeTerm("quadratic", 0.5)):
        lam = comp.weight
        for dim, pts in ((1, ax[:, None]), (2, square)):
            feas = Box.cube(dim, -1, 1)
            for _ in range(5):
                eta = 2 * rng.standard_normal(dim)
                center = rng.uniform(-1, 1, dim)
                gamma = rng.uniform(0.2, 2.0)

                def obj(z):
                    z = np.atleast_2d(z)
                    val = z @ eta + 0.5 / gamma * np.sum((z - center) ** 2, axis=1)
                    if comp.kind == "l1":
                        val += lam * np.abs(z).sum(axis=1)
                    elif comp.kind == "quadratic":
                        val += 0.5 * lam * np.sum(z * z, axis=1)
                    return val
                x = composite_prox(eta, center, gamma, feas, comp).point
                worst_gap = max(worst_gap, abs(float(obj(x)[0] - obj(pts).min())))
    worst_cert = 0.0
    for feas, comp in ((Box.cube(4, -1, 1), CompositeTerm("l1", 0.2)),
                       (Ball(np.zeros(4), 1.0), CompositeTerm("quadratic", 1.0)),
                       (Simplex(4, 1.0), CompositeTerm("l1", 0.5))):
        eta, center = rng.standard_normal(4), feas.sample(rng, 1)[0]
        x = composite_prox(eta, center, 0.7, feas, comp).point
        zs = feas.sample(rng, 1000)
        worst_cert = max(worst_cert, variational_slack(x, eta, center, 0.7, feas, comp, zs))
    elapsed = time.perf_counter() - t0
    ok = worst_gap <= 1e-5 and worst_cert <= 1e-9 and elapsed < 10
    verdict(8, "prox and projection", ok,
            f"max grid gap={worst_gap:.2e}, max certificate slack={worst_cert:.2e}", elapsed)
