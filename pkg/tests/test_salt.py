import math

import pytest
from hypothesis import given, strategies as st

from brine.salt import (InfeasibleConcentrationError, bernoulli_entropy,
                        count_salt_configs, log_salt_weight, optimal_theta,
                        salt_split, xi)

# frozen reference values, computed by an independent high-precision solver
THETA_STAR = 0.6916351874265274        # theta*(m=0, c=0.2, kappa=1)
P_PLUS_STAR = 0.27665407497061095
P_MINUS_STAR = 0.12334592502938904
XI_REF = 0.49867226753982913           # Xi(m=0.5, theta=0.8, c=0.2)


class TestBernoulliEntropy:
    def test_endpoints(self):
        assert bernoulli_entropy(0.0) == 0.0
        assert bernoulli_entropy(1.0) == 0.0

    def test_half(self):
        assert bernoulli_entropy(0.5) == pytest.approx(-math.log(2),
                                                       abs=1e-15)

    @given(st.floats(1e-9, 1 - 1e-9))
    def test_symmetric(self, p):
        assert bernoulli_entropy(p) == pytest.approx(
            bernoulli_entropy(1.0 - p), rel=1e-12, abs=1e-12)

    def test_sentinel_outside_unit_interval(self):
        assert bernoulli_entropy(-0.1) == math.inf
        assert bernoulli_entropy(1.1) == math.inf


class TestXi:
    def test_frozen_value(self):
        assert xi(0.5, 0.8, 0.2) == pytest.approx(XI_REF, abs=1e-14)

    def test_zero_concentration(self):
        assert xi(0.3, 0.9, 0.0) == 0.0

    def test_spin_flip_symmetry(self):
        # m -> -m swaps the roles of theta and 1 - theta
        assert xi(0.4, 0.7, 0.15) == pytest.approx(xi(-0.4, 0.3, 0.15),
                                                   abs=1e-15)

    def test_infeasible_sentinel(self):
        # p_minus = 2 (1-theta) c / (1-m) > 1
        assert xi(0.9, 0.0, 0.3) == -math.inf

    def test_nonnegative_when_feasible(self):
        for m, theta in [(0.0, 0.5), (0.5, 0.9), (-0.3, 0.2)]:
            assert xi(m, theta, 0.1) >= 0.0


class TestSaltSplit:
    def test_occupation_probabilities(self):
        s = salt_split(0.5, 0.8, 0.2)
        assert s.p_plus == pytest.approx(2 * 0.8 * 0.2 / 1.5)
        assert s.p_minus == pytest.approx(2 * 0.2 * 0.2 / 0.5)
        assert s.feasible

    def test_infeasible_flag(self):
        assert not salt_split(0.9, 0.0, 0.3).feasible


class TestCountSaltConfigs:
    def test_sums_to_total_placements(self):
        n, M, N = 8, 2, 3
        total = sum(count_salt_configs(n, M, N, Q) for Q in range(N + 1))
        assert total == math.comb(n, N)

    def test_known_value(self):
        # 5 plus sites, 3 minus sites, N=2, Q=1: C(5,1)*C(3,1) = 15
        assert count_salt_configs(8, 2, 2, 1) == 15

    def test_out_of_range_is_zero(self):
        assert count_salt_configs(4, 4, 1, 0) == 0  # no minus sites for N-Q

    def test_parity_violation(self):
        with pytest.raises(ValueError, match="parity"):
            count_salt_configs(4, 1, 1, 0)

    def test_bad_n(self):
        with pytest.raises(ValueError):
            count_salt_configs(4, 6, 1, 0)


class TestLogSaltWeight:
    def test_matches_exact_bigint_sum(self):
        n, M, c, kappa = 12, 4, 0.25, 1.3
        N = math.floor(c * n)
        exact = sum(count_salt_configs(n, M, N, Q) * math.exp(kappa * Q)
                    for Q in range(N + 1))
        assert log_salt_weight(n, M, c, kappa) == pytest.approx(
            math.log(exact), rel=1e-12)

    def test_kappa_zero_is_log_binomial(self):
        n, M, c = 10, 2, 0.3
        N = math.floor(c * n)
        assert log_salt_weight(n, M, c, 0.0) == pytest.approx(
            math.log(math.comb(n, N)), rel=1e-12)

    def test_large_n_finite(self):
        # would overflow in linear space
        val = log_salt_weight(10000, 2000, 0.2, 1.0)
        assert math.isfinite(val) and val > 0

    def test_overfull_lattice(self):
        with pytest.raises(InfeasibleConcentrationError):
            log_salt_weight(4, 0, 1.5, 1.0)  # N = 6 particles on 4 sites

    def test_parity_violation(self):
        with pytest.raises(ValueError, match="parity"):
            log_salt_weight(4, 1, 0.2, 1.0)


class TestOptimalTheta:
    def test_frozen_values(self):
        s = optimal_theta(0.0, 0.2, 1.0)
        assert s.theta == pytest.approx(THETA_STAR, abs=1e-11)
        assert s.p_plus == pytest.approx(P_PLUS_STAR, abs=1e-11)
        assert s.p_minus == pytest.approx(P_MINUS_STAR, abs=1e-11)

    def test_odds_relation_residual(self):
        def odds(p):
            return p / (1.0 - p)

        for m, c, kappa in [(0.0, 0.2, 1.0), (0.6, 0.1, 2.0),
                            (-0.5, 0.05, 0.7)]:
            s = optimal_theta(m, c, kappa)
            assert math.log(odds(s.p_plus)) - math.log(odds(s.p_minus)) == \
                pytest.approx(kappa, abs=1e-9)

    def test_kappa_zero_splits_proportionally(self):
        s = optimal_theta(0.4, 0.1, 0.0)
        assert s.theta == pytest.approx(0.7, abs=1e-11)
        assert s.p_plus == pytest.approx(s.p_minus, abs=1e-11)

    def test_maximizes_objective(self):
        m, c, kappa = 0.3, 0.15, 1.2
        s = optimal_theta(m, c, kappa)
        best = kappa * s.theta * c + xi(m, s.theta, c)
        for theta in (s.theta - 0.05, s.theta + 0.05, 0.1, 0.9):
            assert kappa * theta * c + xi(m, theta, c) <= best + 1e-12

    def test_domain_errors(self):
        with pytest.raises(ValueError, match="m must"):
            optimal_theta(1.0, 0.1, 1.0)
        with pytest.raises(ValueError, match="c must"):
            optimal_theta(0.0, 0.0, 1.0)
        with pytest.raises(ValueError, match="kappa"):
            optimal_theta(0.0, 0.1, -1.0)
