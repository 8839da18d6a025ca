"""Lattice simulator: fixed-salt Gibbs sampling and an exact-enumeration oracle.

States live on an L^d box with a frozen one-site boundary shell of spins
equal to the boundary condition; salt is absent outside the box.  The salt
number N = floor(c L^d) is conserved: spin flips are plain Metropolis
moves, salt moves are global swap proposals (uniform particle, uniform
target site) which satisfy detailed balance with respect to the
N-conditioned measure.

Randomness comes from numpy's counter-based Philox generator keyed on the
config seed, so identical configs yield bit-identical chains on any
platform and either kernel backend.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .params import BoundaryCondition, ModelParams, validate


@dataclass(frozen=True)
class ChainConfig:
    params: ModelParams
    L: int
    seed: int
    sweeps: int
    burn_in: int | None = None  # default: 20% of sweeps
    thinning: int = 10

    @property
    def resolved_burn_in(self) -> int:
        return self.sweeps // 5 if self.burn_in is None else self.burn_in

    def check(self) -> "ChainConfig":
        validate(self.params)
        if self.L < 1:
            raise ValueError(f"L must be >= 1, got {self.L}")
        burn = self.resolved_burn_in
        if not self.sweeps > burn >= 0:
            raise ValueError(f"need sweeps > burn_in >= 0, got "
                             f"sweeps={self.sweeps}, burn_in={burn}")
        if self.thinning < 1:
            raise ValueError(f"thinning must be >= 1, got {self.thinning}")
        return self


def build_neighbors(L: int, d: int) -> np.ndarray:
    """(L^d, 2d) table of flat neighbor indices; -1 marks the frozen shell."""
    n = L ** d
    shape = (L,) * d
    idx = np.arange(n).reshape(shape)
    nbrs = np.empty((n, 2 * d), dtype=np.int32)
    coords = np.array(np.unravel_index(np.arange(n), shape)).T  # (n, d)
    for k in range(d):
        for sgn, col in ((1, 2 * k), (-1, 2 * k + 1)):
            shifted = coords.copy()
            shifted[:, k] += sgn
            inside = (shifted[:, k] >= 0) & (shifted[:, k] < L)
            flat = np.full(n, -1, dtype=np.int32)
            flat[inside] = idx[tuple(shifted[inside].T)]
            nbrs[:, col] = flat
    return nbrs


@dataclass
class LatticeState:
    """Spin and salt configuration with cached totals and energy."""

    L: int
    d: int
    bc: BoundaryCondition
    params: ModelParams
    spins: np.ndarray       # int8, flat, values -1/+1
    salt: np.ndarray        # int8, flat, values 0/1
    salt_pos: np.ndarray    # int64 positions of the N salt particles
    M: int
    N: int
    Q: int
    energy: float
    nbrs: np.ndarray = field(repr=False, default=None)

    @property
    def n_sites(self) -> int:
        return self.L ** self.d

    def recompute(self) -> tuple[int, int, int, float]:
        """Totals and energy from scratch; the coherence reference."""
        M = int(self.spins.sum())
        N = int(self.salt.sum())
        Q = int(self.salt[self.spins == 1].sum())
        energy = compute_energy(self.spins, self.salt, self.nbrs,
                                self.bc.spin, self.params)
        return M, N, Q, energy


def compute_energy(spins: np.ndarray, salt: np.ndarray, nbrs: np.ndarray,
                   bc_spin: int, params: ModelParams) -> float:
    """Full interaction energy: bonds with one endpoint inside count once."""
    n = spins.shape[0]
    s = spins.astype(np.int64)
    bond = 0
    boundary = 0
    for col in range(nbrs.shape[1]):
        nb = nbrs[:, col]
        inside = nb >= 0
        # interior bonds appear twice in the table; halve below
        bond += int((s[inside] * s[nb[inside]]).sum())
        boundary += int(s[~inside].sum()) * bc_spin
    salt_on_minus = int(salt[spins == -1].sum())
    return (-params.J * (bond / 2.0 + boundary)
            - params.h * float(s.sum())
            + params.kappa * salt_on_minus)


def init_state(config: ChainConfig,
               rng: np.random.Generator | None = None) -> LatticeState:
    """All spins at the boundary value; salt placed uniformly at random."""
    config.check()
    p = config.params
    n = config.L ** p.d
    if rng is None:
        rng = np.random.Generator(np.random.Philox(config.seed))
    spins = np.full(n, p.bc.spin, dtype=np.int8)
    salt = np.zeros(n, dtype=np.int8)
    N = math.floor(p.c * n)
    salt_pos = np.sort(rng.choice(n, size=N, replace=False)).astype(np.int64)
    salt[salt_pos] = 1
    nbrs = build_neighbors(config.L, p.d)
    state = LatticeState(config.L, p.d, p.bc, p, spins, salt, salt_pos,
                         0, N, 0, 0.0, nbrs)
    state.M, state.N, state.Q, state.energy = state.recompute()
    return state


def _delta_spin_flip(state: LatticeState, site: int) -> float:
    si = int(state.spins[site])
    nbsum = 0
    for nb in state.nbrs[site]:
        nbsum += state.bc.spin if nb < 0 else int(state.spins[nb])
    p = state.params
    return (2.0 * p.J * si * nbsum + 2.0 * p.h * si
            + p.kappa * int(state.salt[site]) * si)


def spin_flip_step(state: LatticeState, site: int,
                   rng: np.random.Generator) -> bool:
    """Metropolis flip of one spin; caches updated incrementally."""
    dE = _delta_spin_flip(state, site)
    if dE > 0.0 and rng.random() >= math.exp(-dE):
        return False
    si = int(state.spins[site])
    state.spins[site] = -si
    state.M -= 2 * si
    if state.salt[site]:
        state.Q -= si
    state.energy += dE
    return True


def salt_swap_step(state: LatticeState, site_from: int, site_to: int,
                   rng: np.random.Generator) -> bool:
    """Metropolis move of a salt particle; conserves N."""
    if not state.salt[site_from] or state.salt[site_to]:
        return False  # blocked proposal, counted by the caller
    sf = int(state.spins[site_from])
    st = int(state.spins[site_to])
    dE = 0.5 * state.params.kappa * (sf - st)
    if dE > 0.0 and rng.random() >= math.exp(-dE):
        return False
    state.salt[site_from] = 0
    state.salt[site_to] = 1
    k = int(np.nonzero(state.salt_pos == site_from)[0][0])
    state.salt_pos[k] = site_to
    state.Q += (st - sf) // 2
    state.energy += dE
    return True


def _block_stderr(x: np.ndarray, block: int = 64) -> float:
    x = np.asarray(x, dtype=float)
    x = x[~np.isnan(x)]
    if x.size == 0:
        return float("nan")
    nb = x.size // block
    if nb < 2:
        return float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    means = x[: nb * block].reshape(nb, block).mean(axis=1)
    return float(np.std(means, ddof=1) / math.sqrt(nb))


@dataclass
class SampleStats:
    """Thinned post-burn-in estimates from one chain (or a merged set)."""

    mean_m: float
    stderr_m: float
    mean_q: float           # Q / L^d density
    stderr_q: float
    occ_plus: float         # empirical salt frequency on plus spins
    stderr_occ_plus: float
    occ_minus: float
    stderr_occ_minus: float
    hist_m: dict            # M -> count
    joint_mq: dict          # (M, Q) -> count
    n_samples: int
    acc_spin_rate: float
    acc_salt_rate: float
    blocked_salt: int
    backend: str = _backend.BACKEND
    samples_m: np.ndarray | None = None
    samples_q: np.ndarray | None = None
    window_salt: np.ndarray | None = None
    window_spins: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "mean_m": self.mean_m, "stderr_m": self.stderr_m,
            "mean_q": self.mean_q, "stderr_q": self.stderr_q,
            "occ_plus": self.occ_plus, "stderr_occ_plus": self.stderr_occ_plus,
            "occ_minus": self.occ_minus,
            "stderr_occ_minus": self.stderr_occ_minus,
            "hist_m": {str(k): int(v) for k, v in sorted(self.hist_m.items())},
            "n_samples": self.n_samples,
            "acc_spin_rate": self.acc_spin_rate,
            "acc_salt_rate": self.acc_salt_rate,
            "blocked_salt": self.blocked_salt,
            "backend": self.backend,
        }


def run_chain(config: ChainConfig, accept_bias: float = 0.0,
              window_sites: np.ndarray | None = None,
              keep_samples: bool = False,
              chunk: int = 256, chain_index: int = 0) -> SampleStats:
    """Alternate full spin sweeps with L^d salt-swap proposals.

    Records M and Q each sweep; estimates use post-burn-in sweeps thinned
    by config.thinning, with blocked standard errors (blocks of 64).
    window_sites additionally records the spin/salt values on those sites
    at every retained sample (used for the product-form checks).
    chain_index selects a disjoint Philox stream for parallel replicas.
    """
    config.check()
    p = config.params
    n = config.L ** p.d
    rng = np.random.Generator(np.random.Philox(config.seed).jumped(chain_index))
    state = init_state(config, rng)
    N = state.N

    if window_sites is not None:
        chunk = config.thinning  # sample boundaries must align with chunks

    all_M = np.empty(config.sweeps, dtype=np.int64)
    all_Q = np.empty(config.sweeps, dtype=np.int64)
    acc_spin = acc_salt = blocked = 0
    win_salt, win_spins = [], []

    M, Q, energy = state.M, state.Q, state.energy
    done = 0
    burn = config.resolved_burn_in
    while done < config.sweeps:
        k = min(chunk, config.sweeps - done)
        u_spin = rng.random((k, n))
        if N > 0:
            prop_part = rng.integers(0, N, size=(k, n), dtype=np.int64)
            prop_site = rng.integers(0, n, size=(k, n), dtype=np.int64)
            u_salt = rng.random((k, n))
        else:
            prop_part = np.empty((k, 0), dtype=np.int64)
            prop_site = np.empty((k, 0), dtype=np.int64)
            u_salt = np.empty((k, 0))
        out_M = np.empty(k, dtype=np.int64)
        out_Q = np.empty(k, dtype=np.int64)
        M, Q, energy, a_sp, a_sa, bl = _backend.run_sweeps(
            state.spins, state.salt, state.salt_pos, state.nbrs, p.bc.spin,
            p.J, p.h, p.kappa, accept_bias,
            u_spin, u_salt, prop_part, prop_site, out_M, out_Q, M, Q, energy)
        all_M[done:done + k] = out_M
        all_Q[done:done + k] = out_Q
        acc_spin += a_sp
        acc_salt += a_sa
        blocked += bl
        done += k
        if window_sites is not None and done > burn:
            win_salt.append(state.salt[window_sites].copy())
            win_spins.append(state.spins[window_sites].copy())

    state.M, state.Q, state.energy = int(M), int(Q), float(energy)

    sel = np.arange(burn, config.sweeps, config.thinning)
    m_s = all_M[sel]
    q_s = all_Q[sel]
    n_plus = (n + m_s) / 2.0
    n_minus = (n - m_s) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        occ_p = np.where(n_plus > 0, q_s / n_plus, np.nan)
        occ_m = np.where(n_minus > 0, (N - q_s) / n_minus, np.nan)

    hist = {int(v): int(cnt) for v, cnt in zip(*np.unique(m_s, return_counts=True))}
    codes = m_s * (2 * n + 1) + q_s  # injective since 0 <= Q <= n
    joint = {}
    for code, cnt in zip(*np.unique(codes, return_counts=True)):
        mm = int(code) // (2 * n + 1)  # floor division: exact for Q in [0, 2n]
        qq = int(code) - mm * (2 * n + 1)
        joint[(mm, qq)] = int(cnt)

    n_prop_salt = config.sweeps * n if N > 0 else 0
    return SampleStats(
        mean_m=float(m_s.mean()) / n, stderr_m=_block_stderr(m_s / n),
        mean_q=float(q_s.mean()) / n, stderr_q=_block_stderr(q_s / n),
        occ_plus=float(np.nanmean(occ_p)), stderr_occ_plus=_block_stderr(occ_p),
        occ_minus=float(np.nanmean(occ_m)), stderr_occ_minus=_block_stderr(occ_m),
        hist_m=hist, joint_mq=joint, n_samples=int(sel.size),
        acc_spin_rate=acc_spin / (config.sweeps * n),
        acc_salt_rate=acc_salt / n_prop_salt if n_prop_salt else float("nan"),
        blocked_salt=blocked,
        samples_m=m_s if keep_samples else None,
        samples_q=q_s if keep_samples else None,
        window_salt=np.array(win_salt) if win_salt else None,
        window_spins=np.array(win_spins) if win_spins else None,
    )


def merge_stats(stats: list[SampleStats]) -> SampleStats:
    """Deterministic fold of per-chain statistics, ordered by chain index."""
    if len(stats) == 1:
        return stats[0]
    hist, joint = {}, {}
    for st in stats:
        for k, v in st.hist_m.items():
            hist[k] = hist.get(k, 0) + v
        for k, v in st.joint_mq.items():
            joint[k] = joint.get(k, 0) + v
    n_tot = sum(st.n_samples for st in stats)
    w = [st.n_samples / n_tot for st in stats]

    def wmean(attr):
        return float(sum(wi * getattr(st, attr) for wi, st in zip(w, stats)))

    def werr(attr):
        # chains are independent; combine their blocked errors
        return float(math.sqrt(sum((wi * getattr(st, attr)) ** 2
                                   for wi, st in zip(w, stats))))

    return SampleStats(
        mean_m=wmean("mean_m"), stderr_m=werr("stderr_m"),
        mean_q=wmean("mean_q"), stderr_q=werr("stderr_q"),
        occ_plus=wmean("occ_plus"), stderr_occ_plus=werr("stderr_occ_plus"),
        occ_minus=wmean("occ_minus"), stderr_occ_minus=werr("stderr_occ_minus"),
        hist_m=hist, joint_mq=joint, n_samples=n_tot,
        acc_spin_rate=wmean("acc_spin_rate"),
        acc_salt_rate=wmean("acc_salt_rate"),
        blocked_salt=sum(st.blocked_salt for st in stats),
    )


class EnumerationCapError(ValueError):
    """The requested exact enumeration exceeds the state-space cap."""


@dataclass
class ExactEnumeration:
    """Exact Gibbs distribution on a tiny lattice at fixed salt number.

    All 2^n spin configurations and all C(n, N) salt placements are
    enumerated with their Boltzmann weights from the interaction energy.
    """

    L: int
    d: int
    n: int
    N: int
    params: ModelParams
    sigma: np.ndarray        # (n_spin, n) int8
    M: np.ndarray            # (n_spin,)
    bond_energy: np.ndarray  # (n_spin,) -J * (pair sum + boundary)
    salt_combos: np.ndarray  # (n_salt, n) int8
    spin_prob: np.ndarray    # (n_spin,) marginal over salt
    joint_mq: dict           # (M, Q) -> probability
    salt_site_marginal: np.ndarray
    spin_site_marginal: np.ndarray

    def salt_conditional(self, spin_index: int) -> np.ndarray:
        """P(S | sigma): probabilities of each salt placement."""
        sig = self.sigma[spin_index].astype(np.int64)
        ice = (1 - sig) // 2
        w = np.exp(-self.params.kappa * (self.salt_combos @ ice))
        return w / w.sum()

    def conditional_spin_given_M(self, M: int) -> dict[int, float]:
        """P(sigma | M_L = M) in the full fixed-salt measure."""
        mask = self.M == M
        if not mask.any():
            raise ValueError(f"no configurations with M={M}")
        p = self.spin_prob[mask]
        p = p / p.sum()
        return dict(zip(np.nonzero(mask)[0].tolist(), p.tolist()))

    def ising_conditional_given_M(self, M: int) -> dict[int, float]:
        """P(sigma | M_L = M) in the zero-field, salt-free Ising measure."""
        mask = self.M == M
        if not mask.any():
            raise ValueError(f"no configurations with M={M}")
        e = self.bond_energy[mask]
        w = np.exp(-(e - e.min()))
        w = w / w.sum()
        return dict(zip(np.nonzero(mask)[0].tolist(), w.tolist()))


def exact_enumerate(params: ModelParams, L: int,
                    cap: int = 10 ** 8) -> ExactEnumeration:
    """Direct summation of e^{-H} over every (spin, salt) state."""
    validate(params)
    n = L ** params.d
    N = math.floor(params.c * n)
    total = 2 ** n * math.comb(n, N)
    if total > cap:
        raise EnumerationCapError(
            f"state space has {total} states, exceeding the cap {cap}")

    n_spin = 2 ** n
    bits = (np.arange(n_spin, dtype=np.int64)[:, None]
            >> np.arange(n, dtype=np.int64)) & 1
    sigma = (2 * bits - 1).astype(np.int8)
    M = sigma.sum(axis=1).astype(np.int64)

    nbrs = build_neighbors(L, params.d)
    pairs = [(i, int(nb)) for i in range(n) for nb in nbrs[i] if 0 <= nb
             and i < nb]
    bcount = (nbrs < 0).sum(axis=1)
    s64 = sigma.astype(np.int64)
    pair_sum = np.zeros(n_spin, dtype=np.int64)
    for i, j in pairs:
        pair_sum += s64[:, i] * s64[:, j]
    boundary = s64 @ bcount.astype(np.int64) * params.bc.spin
    bond_energy = -params.J * (pair_sum + boundary)
    E_spin = bond_energy - params.h * M

    salt_combos = np.zeros((math.comb(n, N), n), dtype=np.int8)
    for row, combo in enumerate(itertools.combinations(range(n), N)):
        salt_combos[row, list(combo)] = 1

    spin_prob = np.zeros(n_spin)
    joint: dict[tuple[int, int], float] = {}
    salt_marg = np.zeros(n)
    spin_marg = np.zeros(n)
    shift = E_spin.min()
    block = max(1, 2 ** 22 // max(1, salt_combos.shape[0]))
    for lo in range(0, n_spin, block):
        hi = min(lo + block, n_spin)
        ice = ((1 - s64[lo:hi]) // 2)                    # (b, n)
        minus_cnt = salt_combos.astype(np.int64) @ ice.T  # (n_salt, b)
        w = np.exp(-(E_spin[lo:hi][None, :] - shift)
                   - params.kappa * minus_cnt)           # (n_salt, b)
        spin_prob[lo:hi] = w.sum(axis=0)
        salt_marg += w.sum(axis=1) @ salt_combos
        spin_marg += (w.sum(axis=0)[:, None] * (s64[lo:hi] == 1)).sum(axis=0)
        plus_cnt = salt_combos.astype(np.int64) @ ((1 + s64[lo:hi]) // 2).T
        for b in range(hi - lo):
            mm = int(M[lo + b])
            for qq, ww in zip(*_sum_by_key(plus_cnt[:, b], w[:, b])):
                key = (mm, int(qq))
                joint[key] = joint.get(key, 0.0) + float(ww)

    Z = spin_prob.sum()
    spin_prob /= Z
    salt_marg /= Z
    spin_marg /= Z
    joint = {k: v / Z for k, v in joint.items()}
    return ExactEnumeration(L, params.d, n, N, params, sigma, M, bond_energy,
                            salt_combos, spin_prob, joint, salt_marg,
                            spin_marg)


def _sum_by_key(keys: np.ndarray, values: np.ndarray):
    uniq, inv = np.unique(keys, return_inverse=True)
    sums = np.zeros(uniq.size)
    np.add.at(sums, inv, values)
    return uniq, sums


def tv_distance(p: dict, q: dict) -> float:
    """Total variation distance between two distributions over hashables."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
