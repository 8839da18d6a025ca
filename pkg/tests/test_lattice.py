import math

import numpy as np
import pytest

from brine.lattice import (ChainConfig, EnumerationCapError, build_neighbors,
                           exact_enumerate, init_state, merge_stats,
                           run_chain, salt_swap_step, spin_flip_step,
                           tv_distance)
from brine.params import BoundaryCondition, ModelParams

P33 = ModelParams(J=0.4, h=-0.05, kappa=1.0, c=2 / 9)


class TestNeighbors:
    def test_degree_and_boundary_2d(self):
        nbrs = build_neighbors(4, 2)
        assert nbrs.shape == (16, 4)
        # corner has two frozen-shell links, interior none
        assert (nbrs[0] < 0).sum() == 2
        assert (nbrs[5] < 0).sum() == 0
        # total boundary links = perimeter
        assert (nbrs < 0).sum() == 4 * 4

    def test_symmetry(self):
        nbrs = build_neighbors(3, 2)
        for i in range(9):
            for nb in nbrs[i]:
                if nb >= 0:
                    assert i in nbrs[nb]

    def test_1d(self):
        nbrs = build_neighbors(5, 1)
        assert nbrs.shape == (5, 2)
        assert nbrs[0, 1] == -1 and nbrs[4, 0] == -1


class TestState:
    def test_init_counts(self):
        config = ChainConfig(P33, L=3, seed=1, sweeps=10)
        state = init_state(config)
        assert state.N == 2
        assert (state.spins == 1).all()
        assert state.salt.sum() == 2
        assert state.M == 9 and state.Q == 2

    def test_recompute_matches_cache(self):
        config = ChainConfig(P33.replace(bc=BoundaryCondition.MINUS),
                             L=4, seed=3, sweeps=10)
        state = init_state(config)
        assert (state.M, state.N, state.Q, state.energy) == \
            pytest.approx(state.recompute())

    def test_reference_steps_keep_caches_coherent(self):
        config = ChainConfig(P33, L=4, seed=5, sweeps=10)
        state = init_state(config)
        rng = np.random.default_rng(0)
        n = state.n_sites
        for _ in range(500):
            spin_flip_step(state, int(rng.integers(n)), rng)
            k = int(rng.integers(state.N))
            salt_swap_step(state, int(state.salt_pos[k]),
                           int(rng.integers(n)), rng)
        M, N, Q, energy = state.recompute()
        assert (state.M, state.N, state.Q) == (M, N, Q)
        assert state.energy == pytest.approx(energy, rel=1e-12)
        assert sorted(state.salt_pos) == list(np.nonzero(state.salt)[0])

    def test_config_validation(self):
        with pytest.raises(ValueError, match="L"):
            ChainConfig(P33, L=0, seed=1, sweeps=10).check()
        with pytest.raises(ValueError, match="burn_in"):
            ChainConfig(P33, L=3, seed=1, sweeps=10, burn_in=10).check()
        with pytest.raises(ValueError, match="thinning"):
            ChainConfig(P33, L=3, seed=1, sweeps=10, thinning=0).check()


class TestRunChain:
    def test_basic_stats(self):
        config = ChainConfig(P33, L=4, seed=7, sweeps=2000)
        stats = run_chain(config)
        assert stats.n_samples == (2000 - 400 + 9) // 10
        assert -1.0 <= stats.mean_m <= 1.0
        assert 0.0 < stats.acc_spin_rate < 1.0
        assert sum(stats.hist_m.values()) == stats.n_samples
        assert sum(stats.joint_mq.values()) == stats.n_samples

    def test_deterministic_given_seed(self):
        config = ChainConfig(P33, L=4, seed=11, sweeps=500)
        a = run_chain(config, keep_samples=True)
        b = run_chain(config, keep_samples=True)
        np.testing.assert_array_equal(a.samples_m, b.samples_m)
        np.testing.assert_array_equal(a.samples_q, b.samples_q)

    def test_chain_index_changes_stream(self):
        config = ChainConfig(P33, L=4, seed=11, sweeps=500)
        a = run_chain(config, keep_samples=True, chain_index=0)
        b = run_chain(config, keep_samples=True, chain_index=1)
        assert not np.array_equal(a.samples_m, b.samples_m)

    def test_zero_salt(self):
        params = ModelParams(J=0.4, h=0.1, kappa=1.0, c=0.0)
        stats = run_chain(ChainConfig(params, L=4, seed=1, sweeps=300))
        assert stats.mean_q == 0.0
        assert math.isnan(stats.acc_salt_rate)

    def test_window_recording(self):
        config = ChainConfig(P33, L=4, seed=2, sweeps=400, thinning=20)
        stats = run_chain(config, window_sites=np.array([0, 5]))
        assert stats.window_salt.shape[1] == 2
        assert set(np.unique(stats.window_spins)) <= {-1, 1}


class TestEquilibriumStructure:
    def test_window_salt_indicators_uncorrelated(self):
        # salt occupancies on a fixed 2x2 window, given the window's spins,
        # decorrelate across sites on a large lattice
        params = ModelParams(J=0.6, h=0.05, kappa=1.0, c=0.1)
        config = ChainConfig(params, L=32, seed=21, sweeps=6000,
                             burn_in=1500, thinning=3)
        window = np.array([0, 1, 32, 33])  # the 2x2 corner block
        stats = run_chain(config, window_sites=window)
        spins = stats.window_spins
        salt = stats.window_salt.astype(float)
        # condition on the dominant (all-plus) window spin state
        mask = (spins == 1).all(axis=1)
        sub = salt[mask]
        assert sub.shape[0] > 200
        worst = 0.0
        for i in range(4):
            for j in range(i + 1, 4):
                cov = np.cov(sub[:, i], sub[:, j])[0, 1]
                se = np.std(sub[:, i] * sub[:, j]) / math.sqrt(sub.shape[0])
                worst = max(worst, abs(cov) - 3 * max(se, 1e-4))
        assert worst <= 0.0

    def test_magnetization_concentrates_with_L(self):
        params = ModelParams(J=0.6, h=0.05, kappa=1.0, c=0.1)

        def var_m(L):
            stats = run_chain(ChainConfig(params, L=L, seed=4, sweeps=3000,
                                          burn_in=600, thinning=3),
                              keep_samples=True)
            n = L * L
            return np.var(stats.samples_m / n)

        assert var_m(32) < var_m(16)


class TestMergeStats:
    def test_weighted_merge(self):
        config = ChainConfig(P33, L=4, seed=13, sweeps=600)
        a = run_chain(config, chain_index=0)
        b = run_chain(config, chain_index=1)
        merged = merge_stats([a, b])
        assert merged.n_samples == a.n_samples + b.n_samples
        assert merged.mean_m == pytest.approx(0.5 * (a.mean_m + b.mean_m))
        assert sum(merged.hist_m.values()) == merged.n_samples
        assert merged.stderr_m <= max(a.stderr_m, b.stderr_m)

    def test_single_chain_passthrough(self):
        config = ChainConfig(P33, L=3, seed=1, sweeps=100)
        stats = run_chain(config)
        assert merge_stats([stats]) is stats


class TestExactEnumeration:
    def test_distributions_normalized(self):
        exact = exact_enumerate(P33, 3)
        assert exact.spin_prob.sum() == pytest.approx(1.0, abs=1e-12)
        assert sum(exact.joint_mq.values()) == pytest.approx(1.0, abs=1e-12)
        probs = exact.salt_conditional(17)
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)

    def test_cap(self):
        with pytest.raises(EnumerationCapError):
            exact_enumerate(P33, 3, cap=10)

    def test_field_shifts_magnetization(self):
        lo = exact_enumerate(P33.replace(h=-0.5), 2)
        hi = exact_enumerate(P33.replace(h=0.5), 2)
        assert (hi.spin_prob @ hi.M) > (lo.spin_prob @ lo.M)

    def test_salt_prefers_plus_sites(self):
        exact = exact_enumerate(ModelParams(J=0.3, h=0.0, kappa=2.0, c=0.25),
                                2)
        # conditionally on a mixed spin state, salt avoids minus spins
        idx = int(np.nonzero(exact.M == 0)[0][0])
        probs = exact.salt_conditional(idx)
        plus = (1 + exact.sigma[idx].astype(int)) // 2
        q = exact.salt_combos.astype(int) @ plus
        assert probs[q == q.max()].max() > probs[q == q.min()].max()

    def test_missing_M_raises(self):
        exact = exact_enumerate(P33, 2)
        with pytest.raises(ValueError, match="M=3"):
            exact.conditional_spin_given_M(3)


class TestTvDistance:
    def test_identical(self):
        p = {(1, 0): 0.5, (2, 1): 0.5}
        assert tv_distance(p, dict(p)) == 0.0

    def test_disjoint(self):
        assert tv_distance({"a": 1.0}, {"b": 1.0}) == pytest.approx(1.0)

    def test_half_overlap(self):
        assert tv_distance({"a": 1.0}, {"a": 0.5, "b": 0.5}) == \
            pytest.approx(0.5)
