import math

import numpy as np
import pytest

from brine.magnetization import MeanFieldModel, Onsager2DModel
from brine.params import BoundaryCondition, ModelParams
from brine.salt import optimal_theta
from brine.variational import (CoexistenceDomainError,
                               DegenerateMinimizerError, NoCoexistenceError,
                               Region, big_g, classify, dilute_check,
                               field_for_m, minimize_g, mole_fractions,
                               phase_boundaries, script_g)

MF = MeanFieldModel(0.45, d=2)          # m* ~ 0.912
ONSAGER = Onsager2DModel(0.6)           # m* ~ 0.9736


class TestMoleFractions:
    def test_mass_balance_and_odds(self):
        for m, c, kappa in [(0.0, 0.2, 1.0), (0.7, 0.08, 2.0),
                            (-0.4, 0.12, 0.5)]:
            q = mole_fractions(m, c, kappa)
            mass = 0.5 * (1 + m) * q.q_plus + 0.5 * (1 - m) * q.q_minus
            assert mass == pytest.approx(c, abs=1e-11)
            odds = lambda p: p / (1 - p)
            assert odds(q.q_plus) / odds(q.q_minus) == pytest.approx(
                math.exp(kappa), rel=1e-8)

    def test_zero_concentration(self):
        q = mole_fractions(0.3, 0.0, 1.0)
        assert q.q_plus == q.q_minus == 0.0
        assert q.field == 0.0

    def test_matches_inner_optimum(self):
        s = optimal_theta(0.25, 0.15, 1.3)
        q = mole_fractions(0.25, 0.15, 1.3)
        assert q.q_plus == pytest.approx(s.p_plus, abs=1e-11)
        assert q.q_minus == pytest.approx(s.p_minus, abs=1e-11)

    def test_field_sign(self):
        # salt prefers plus spins, so the field at m = +-m* is negative
        q = mole_fractions(0.9, 0.1, 1.0)
        assert q.field < 0.0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            mole_fractions(1.0, 0.1, 1.0)


class TestFieldForM:
    def test_frozen_midpoint(self):
        # from the frozen (p+, p-) at m=0, c=0.2, kappa=1
        expect = 0.5 * (math.log1p(-0.27665407497061095)
                        - math.log1p(-0.12334592502938904))
        assert field_for_m(0.0, 0.2, 1.0, MF.spontaneous_m) == pytest.approx(
            expect, abs=1e-10)

    def test_outside_coexistence_raises(self):
        with pytest.raises(CoexistenceDomainError):
            field_for_m(0.99, 0.1, 1.0, MF.spontaneous_m)

    def test_increasing_in_m(self):
        ms = MF.spontaneous_m
        vals = [field_for_m(m, 0.1, 1.0, ms)
                for m in np.linspace(-ms, ms, 21)]
        assert all(b > a for a, b in zip(vals, vals[1:]))


class TestFunctionals:
    def test_big_g_is_theta_infimum(self):
        params = ModelParams(J=0.45, h=0.02, kappa=1.0, c=0.1)
        m = 0.3
        g = big_g(m, params, MF)
        for theta in np.linspace(0.05, 0.95, 19):
            assert g <= script_g(m, theta, params, MF) + 1e-12

    def test_zero_concentration_reduces(self):
        params = ModelParams(J=0.45, h=0.1, kappa=1.0, c=0.0)
        m = 0.97
        assert big_g(m, params, MF) == pytest.approx(
            -0.1 * m + MF.free_energy(m), abs=1e-14)

    def test_script_g_infeasible_sentinel(self):
        params = ModelParams(J=0.45, h=0.0, kappa=1.0, c=0.3)
        assert script_g(0.9, 0.0, params, MF) == math.inf


class TestMinimizeG:
    def test_degenerate_raises(self):
        params = ModelParams(J=0.45, h=0.0, kappa=1.0, c=0.0)
        with pytest.raises(DegenerateMinimizerError):
            minimize_g(params, MF)

    def test_zero_salt_reduces_to_mag(self):
        params = ModelParams(J=0.45, h=0.2, kappa=1.0, c=0.0)
        sol = minimize_g(params, MF)
        assert sol.m == pytest.approx(MF.mag_for(0.2), abs=1e-12)
        assert sol.p_plus == sol.p_minus == 0.0

    def test_stationarity_residual(self):
        params = ModelParams(J=0.45, h=-0.03, kappa=1.0, c=0.1)
        sol = minimize_g(params, MF)
        # the minimizer sits where the stationarity map crosses h
        res = mole_fractions(sol.m, 0.1, 1.0).field
        if abs(sol.m) > MF.spontaneous_m:
            res += math.copysign(MF.field_for(abs(sol.m)), sol.m)
        assert res == pytest.approx(-0.03, abs=1e-7)

    def test_grid_search_oracle(self):
        params = ModelParams(J=0.45, h=-0.02, kappa=1.5, c=0.08)
        sol = minimize_g(params, MF)
        grid = np.linspace(-0.999, 0.999, 4001)
        vals = [big_g(m, params, MF) for m in grid]
        m_grid = grid[int(np.argmin(vals))]
        assert sol.m == pytest.approx(m_grid, abs=1e-3)
        assert sol.value <= min(vals) + 1e-10

    def test_regions_and_droplet_fraction(self):
        base = dict(J=0.45, kappa=1.0, c=0.05)
        liquid = minimize_g(ModelParams(h=0.5, **base), MF)
        assert liquid.region is Region.LIQUID
        assert liquid.droplet_fraction == 0.0

        ice = minimize_g(ModelParams(h=-0.5, **base), MF)
        assert ice.region is Region.ICE
        assert ice.droplet_fraction == 1.0  # plus bc: droplet is the ice

        band = minimize_g(ModelParams(h=field_for_m(
            0.0, 0.05, 1.0, MF.spontaneous_m), **base), MF)
        assert band.region is Region.PHASE_SEPARATION
        assert band.droplet_fraction == pytest.approx(0.5, abs=1e-6)

    def test_minus_bc_mirrors_droplet(self):
        h_mid = field_for_m(0.0, 0.05, 1.0, MF.spontaneous_m)
        plus = minimize_g(ModelParams(J=0.45, h=h_mid, kappa=1.0, c=0.05,
                                      bc=BoundaryCondition.PLUS), MF)
        minus = minimize_g(ModelParams(J=0.45, h=h_mid, kappa=1.0, c=0.05,
                                       bc=BoundaryCondition.MINUS), MF)
        assert plus.m == minus.m
        assert plus.droplet_fraction + minus.droplet_fraction == \
            pytest.approx(1.0, abs=1e-12)

    def test_extreme_field_pins_edge(self):
        params = ModelParams(J=0.45, h=50.0, kappa=1.0, c=0.1)
        sol = minimize_g(params, MF)
        assert sol.m > 0.999999

    def test_to_dict_keys(self):
        params = ModelParams(J=0.45, h=0.1, kappa=1.0, c=0.05)
        d = minimize_g(params, MF).to_dict()
        assert set(d) == {"m", "theta", "value", "q_plus", "q_minus",
                          "region", "droplet_fraction"}


class TestPhaseBoundaries:
    def test_shape(self):
        cs = np.linspace(0.0, 0.2, 11)
        pb = phase_boundaries(cs, 0.6, 1.0, ONSAGER)
        assert pb.rows[0] == (0.0, 0.0, 0.0)
        for c, h_minus, h_plus in pb.rows[1:]:
            assert h_minus < h_plus < 0.0

    def test_no_coexistence_below_critical(self):
        with pytest.raises(NoCoexistenceError):
            phase_boundaries([0.0, 0.1], 0.3, 1.0, Onsager2DModel(0.3))

    def test_csv_rows(self):
        pb = phase_boundaries([0.0, 0.1], 0.6, 1.0, ONSAGER)
        rows = pb.to_csv_rows()
        assert rows[0] == ["c", "h_minus", "h_plus"]
        assert len(rows) == 3
        assert float(rows[2][0]) == 0.1


class TestDiluteCheck:
    def test_agreement_at_small_c(self):
        lhs, rhs = dilute_check(1e-4, 0.6, 1.0, ONSAGER)
        assert lhs == pytest.approx(rhs, rel=1e-3)

    def test_zero_cases(self):
        assert dilute_check(0.0, 0.6, 1.0, ONSAGER) == (0.0, 0.0)
        assert dilute_check(0.1, 0.6, 0.0, ONSAGER) == (0.0, 0.0)


class TestClassify:
    def test_regions(self):
        assert classify(0.1, 0.05, 1.0, ONSAGER) is Region.LIQUID
        assert classify(-0.5, 0.05, 1.0, ONSAGER) is Region.ICE
        h_mid = 0.5 * sum(phase_boundaries([0.05], 0.6, 1.0, ONSAGER).rows[0][1:])
        assert classify(h_mid, 0.05, 1.0, ONSAGER) is Region.PHASE_SEPARATION

    def test_zero_salt_band_collapses_to_zero_field(self):
        assert classify(0.0, 0.0, 1.0, ONSAGER) is Region.PHASE_SEPARATION
        assert classify(1e-9, 0.0, 1.0, ONSAGER) is Region.LIQUID
