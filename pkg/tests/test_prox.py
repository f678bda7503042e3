import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ucsaddle import kernels
from ucsaddle._pykernels import project_simplex as py_project_simplex
from ucsaddle.problem import Ball, Box, CompositeTerm, ProblemError, Simplex
from ucsaddle.prox import (EUCLIDEAN, UnsupportedProxError, bregman_divergence, composite_prox,
                           project, variational_slack)


def prox_objective(x, eta, center, gamma, comp):
    return float(eta @ x) + 0.5 / gamma * float((x - center) @ (x - center)) + comp(x)


class TestBregman:
    def test_zero_at_center(self):
        assert bregman_divergence([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_value(self):
        assert bregman_divergence([0.0, 0.0], [3.0, 4.0]) == 12.5

    def test_symmetry_and_setup_agree(self):
        a, b = np.array([0.3, -1.0, 2.0]), np.array([1.0, 0.5, -0.5])
        assert bregman_divergence(a, b) == pytest.approx(bregman_divergence(b, a))
        assert EUCLIDEAN.divergence(a, b) == pytest.approx(bregman_divergence(a, b))

    def test_dimension_mismatch(self):
        with pytest.raises(ProblemError):
            bregman_divergence([0.0], [1.0, 2.0])


class TestProject:
    def test_box(self):
        np.testing.assert_array_equal(project([2.0, -3.0], Box.cube(2, -1, 1)), [1.0, -1.0])

    def test_feasible_is_fixed(self):
        np.testing.assert_array_equal(project([0.2, -0.3], Box.cube(2, -1, 1)), [0.2, -0.3])

    def test_ball(self):
        np.testing.assert_allclose(project([3.0, 4.0], Ball(np.zeros(2), 1.0)), [0.6, 0.8])

    def test_simplex_known(self):
        np.testing.assert_allclose(project([1.0, 1.0, -1.0], Simplex(3, 1.0)), [0.5, 0.5, 0.0])

    @pytest.mark.parametrize("feas", [Box.cube(4, -1, 0.5), Ball(np.ones(4), 0.7), Simplex(4, 2.0)])
    def test_nonexpansive_and_idempotent(self, feas):
        rng = np.random.default_rng(0)
        for _ in range(300):
            a, b = 3 * rng.standard_normal(4), 3 * rng.standard_normal(4)
            pa, pb = project(a, feas), project(b, feas)
            assert feas.contains(pa)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12
            np.testing.assert_allclose(project(pa, feas), pa, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=2, max_size=12), st.floats(0.1, 5.0))
def test_simplex_kernels_agree(values, scale):
    v = np.array(values)
    got = kernels.project_simplex(v, scale)
    ref = py_project_simplex(v, scale)
    np.testing.assert_allclose(got, ref, atol=1e-12)
    assert got.sum() == pytest.approx(scale)
    assert np.all(got >= 0)


class TestCompositeProx:
    def test_interior_step(self):
        r = composite_prox([0.5], [0.0], 1.0, Box.cube(1, -1, 1), CompositeTerm())
        np.testing.assert_allclose(r.point, [-0.5])
        assert r.certificate_delta == 0.0

    def test_soft_threshold(self):
        r = composite_prox([1.0], [0.0], 1.0, Box.cube(1, -1, 1), CompositeTerm("l1", 0.3))
        np.testing.assert_allclose(r.point, [-0.7])

    def test_zero_gradient_fixed_point(self):
        c = np.array([0.2, -0.4])
        r = composite_prox(np.zeros(2), c, 0.7, Ball(np.zeros(2), 1.0), CompositeTerm())
        np.testing.assert_array_equal(r.point, c)

    def test_quadratic_shrink(self):
        r = composite_prox([0.0], [1.0], 1.0, Box.cube(1, -5, 5), CompositeTerm("quadratic", 1.0))
        np.testing.assert_allclose(r.point, [0.5])

    def test_unsupported_pair_named(self):
        with pytest.raises(UnsupportedProxError, match="ball"):
            composite_prox([1.0, 0.0], [0.0, 0.0], 1.0, Ball(np.ones(2), 1.0),
                           CompositeTerm("l1", 0.1))

    def test_bad_gamma(self):
        with pytest.raises(ProblemError):
            composite_prox([1.0], [0.0], 0.0, Box.cube(1, -1, 1), CompositeTerm())

    @pytest.mark.parametrize("comp", [CompositeTerm(), CompositeTerm("l1", 0.4),
                                      CompositeTerm("quadratic", 0.8)])
    def test_grid_minimizer_1d(self, comp):
        rng = np.random.default_rng(3)
        feas = Box.cube(1, -1, 1)
        grid = np.arange(-1.0, 1.0 + 5e-4, 1e-3)
        for _ in range(20):
            eta, center, gamma = rng.normal(size=1) * 2, rng.uniform(-1, 1, 1), rng.uniform(0.2, 2)
            x = composite_prox(eta, center, gamma, feas, comp).point
            best = min(prox_objective(np.array([g]), eta, center, gamma, comp) for g in grid)
            assert prox_objective(x, eta, center, gamma, comp) <= best + 1e-12
            assert best - prox_objective(x, eta, center, gamma, comp) <= 1e-5

    @pytest.mark.parametrize("feas", [Box.cube(2, -1, 1), Ball(np.zeros(2), 1.0)])
    def test_grid_minimizer_2d(self, feas):
        comp = CompositeTerm("l1", 0.3)
        rng = np.random.default_rng(4)
        ax = np.arange(-1.0, 1.0 + 5e-4, 1e-3)
        gx, gy = np.meshgrid(ax, ax)
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        if isinstance(feas, Ball):
            # a curved boundary never lies on grid lines, so add it explicitly
            theta = np.arange(0.0, 2 * np.pi, 1e-4)
            rim = feas.radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
            pts = np.vstack([pts[np.linalg.norm(pts, axis=1) <= feas.radius], rim])
        for _ in range(3):
            eta, center, gamma = rng.normal(size=2) * 2, rng.uniform(-0.7, 0.7, 2), 0.8
            x = composite_prox(eta, center, gamma, feas, comp).point
            vals = pts @ eta + 0.5 / gamma * np.sum((pts - center) ** 2, axis=1) \
                + comp.weight * np.abs(pts).sum(axis=1)
            assert 0 <= vals.min() - prox_objective(x, eta, center, gamma, comp) + 1e-12
            assert vals.min() - prox_objective(x, eta, center, gamma, comp) <= 1e-5

    @pytest.mark.parametrize("feas,comp", list(itertools.product(
        [Box.cube(3, -1, 2), Ball(np.zeros(3), 1.5), Simplex(3, 1.0)],
        [CompositeTerm(), CompositeTerm("l1", 0.5), CompositeTerm("quadratic", 2.0)])))
    def test_variational_certificate(self, feas, comp):
        rng = np.random.default_rng(5)
        for _ in range(20):
            eta = 3 * rng.standard_normal(3)
            center = feas.sample(rng, 1)[0]
            gamma = rng.uniform(0.1, 3.0)
            x = composite_prox(eta, center, gamma, feas, comp).point
            assert feas.contains(x)
            zs = feas.sample(rng, 50)
            assert variational_slack(x, eta, center, gamma, feas, comp, zs) <= 1e-9
            assert variational_slack(x, eta, center, gamma, feas, comp) <= 1e-9

    def test_certificate_detects_wrong_point(self):
        feas = Box.cube(2, -1, 1)
        assert variational_slack(np.zeros(2), np.array([1.0, 0.0]), np.zeros(2), 1.0,
                                 feas, CompositeTerm()) > 0.1
