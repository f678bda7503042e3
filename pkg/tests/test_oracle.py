import numpy as np
import pytest

from ucsaddle.inner import InnerBudgetExhausted
from ucsaddle.oracle import (GHolderConstants, InexactOracle, gradient_identity_error,
                             holder_constant_g, inner_targets, l_of_delta, oracle_call,
                             validate_value_function)
from ucsaddle.problem import (Box, HolderSpec, ProblemError, SmoothField, UniformConvexitySpec,
                              make_bilinear_coupling)

from conftest import bilinear


class TestHolderConstantG:
    def test_quadratic_case(self):
        c = holder_constant_g(HolderSpec(1, 1.0, 1.0, 1.0, 1.0, 0.0), UniformConvexitySpec(2, 1), 5.0)
        assert c.nu_g == 1.0
        assert c.l_nu_g == pytest.approx(3.0)

    def test_decoupled_keeps_direct_term(self):
        c = holder_constant_g(HolderSpec(1, 1.0, 2.0, 0.0, 0.0, 0.0), UniformConvexitySpec(3, 1), 4.0)
        assert c.l_nu_g == pytest.approx(2.0 * 4.0 ** 0.5)

    def test_cubic_case(self):
        c = holder_constant_g(HolderSpec(1, 1.0, 2.0, 1.0, 1.0, 0.0), UniformConvexitySpec(3, 3), 4.0)
        assert c.nu_g == pytest.approx(0.5)
        assert c.l_nu_g == pytest.approx(5.0)

    def test_q_must_exceed_nu(self):
        with pytest.raises(ProblemError):
            holder_constant_g(HolderSpec(1, 1.0, 1.0, 1.0, 1.0, 0.0),
                              UniformConvexitySpec(2, 1), 0.0)


class TestLOfDelta:
    def test_lipschitz_case(self):
        assert l_of_delta(GHolderConstants(5.0, 1.0), 0.1) == 5.0

    def test_holder_case(self):
        assert l_of_delta(GHolderConstants(1.0, 1 / 3), 1.0) == pytest.approx(1.0)

    def test_halving_delta(self):
        c = GHolderConstants(2.0, 0.5)
        ratio = l_of_delta(c, 0.05) / l_of_delta(c, 0.1)
        assert ratio == pytest.approx(2.0 ** (0.5 / 1.5))

    def test_rejects_nonpositive(self):
        with pytest.raises(ProblemError):
            l_of_delta(GHolderConstants(1.0, 1.0), 0.0)


class TestInnerTargets:
    def test_split(self, make_bilinear):
        p = make_bilinear()
        gap, dist = inner_targets(p, 1e-4)
        assert gap == 5e-5
        assert dist == pytest.approx(1e-4 / (2 * p.holder.l_xy * p.feasible_x.diameter_d0))

    def test_decoupled_has_no_distance_target(self):
        p = make_bilinear_coupling(2, 2, np.zeros((2, 2)), None, 1.0, 2.0, Box.cube(2, -1, 1))
        assert inner_targets(p, 1e-3) == (5e-4, None)


class TestOracleCall:
    def test_identity_coupling(self):
        p = make_bilinear_coupling(2, 2, np.eye(2), None, 1.0, 2.0, Box.cube(2, -1, 1))
        r = oracle_call(p, [1.0, 0.0], 1e-6)
        assert 0.5 - 1e-6 <= r.value <= 0.5
        np.testing.assert_allclose(r.gradient, [1.0, 0.0], atol=1e-3)
        assert r.delta_u == 0.0 and r.delta_c == 1e-6
        assert r.l_of_delta == pytest.approx(2.0)

    def test_decoupled_is_exact(self):
        phi = SmoothField(2, amp=np.array([0.5, 1.0]), freq=np.array([1.0, 2.0]),
                          quad=np.diag([1.0, -1.0]))
        p = make_bilinear_coupling(2, 2, np.zeros((2, 2)), phi, 1.0, 3.0, Box.cube(2, -1, 1))
        x = np.array([0.3, -0.6])
        for delta in (1e-1, 1e-8):
            r = oracle_call(p, x, delta)
            assert r.value == phi(x)
            np.testing.assert_array_equal(r.gradient, phi.gradient(x))

    @pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
    def test_inexact_oracle_inequalities(self, q):
        p = bilinear(q)
        oracle = InexactOracle(p)
        rng = np.random.default_rng(11)
        an = p.analytic
        for x in p.feasible_x.sample(rng, 20):
            delta = 10.0 ** rng.uniform(-8, -2)
            r = oracle(x, delta)
            assert abs(r.value - an.g_exact(x)) <= delta
            for z in p.feasible_x.sample(rng, 20):
                d = z - x
                upper = r.value + r.gradient @ d + 0.5 * r.l_of_delta * d @ d + delta
                assert an.g_exact(z) <= upper + 1e-9
        assert oracle.calls == 20 and oracle.inner_iterations > 0

    def test_exhaustion_has_context(self, make_bilinear):
        oracle = InexactOracle(make_bilinear(3.0), max_restarts=1, max_iterations=2)
        with pytest.raises(InnerBudgetExhausted, match="delta_c"):
            oracle(np.full(10, 0.5), 1e-10)

    def test_synthetic_base(self, make_bilinear):
        p = make_bilinear()
        r = InexactOracle(p, base="synthetic")(np.full(10, 0.2), 1e-6)
        assert abs(r.value - p.analytic.g_exact(np.full(10, 0.2))) <= 1e-6

    def test_rejects_bad_delta(self, make_bilinear):
        with pytest.raises(ProblemError):
            oracle_call(make_bilinear(), np.zeros(10), -1.0)


class TestValueFunction:
    @pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
    def test_holder_bounds(self, q):
        assert validate_value_function(bilinear(q), 300).passed

    def test_gradient_identity(self, make_bilinear):
        p = make_bilinear()
        rng = np.random.default_rng(0)
        for x in p.feasible_x.sample(rng, 10):
            assert gradient_identity_error(p, x) <= 1e-5
