"""Salt-side combinatorics: entropy, exact counts, weights, inner optimum.

Placing N = floor(c n) salt particles on a lattice with magnetization m,
a fraction theta of them on plus spins, induces the occupation
probabilities

    p_plus = 2 theta c / (1 + m),    p_minus = 2 (1 - theta) c / (1 - m).

The entropy rate of such placements is

    Xi(m, theta; c) = -(1+m)/2 S(p_plus) - (1-m)/2 S(p_minus)

with S the Bernoulli entropy function.  Infeasible splits (either p > 1)
are encoded by sentinels so that outer minimizations stay total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_THETA_TOL = 1e-12


class InfeasibleConcentrationError(ValueError):
    """The requested (m, c) cannot accommodate the salt: p > 1 everywhere."""


def bernoulli_entropy(p: float) -> float:
    """S(p) = p log p + (1-p) log(1-p); +inf sentinel outside [0, 1]."""
    if not 0.0 <= p <= 1.0:
        return math.inf
    if p == 0.0 or p == 1.0:
        return 0.0
    return p * math.log(p) + (1.0 - p) * math.log1p(-p)


@dataclass(frozen=True)
class SaltSplit:
    """A (m, theta, c) triple with its induced occupation probabilities."""

    m: float
    theta: float
    c: float
    p_plus: float
    p_minus: float

    @property
    def feasible(self) -> bool:
        return self.p_plus <= 1.0 and self.p_minus <= 1.0


def salt_split(m: float, theta: float, c: float) -> SaltSplit:
    p_plus = 2.0 * theta * c / (1.0 + m)
    p_minus = 2.0 * (1.0 - theta) * c / (1.0 - m)
    return SaltSplit(m, theta, c, p_plus, p_minus)


def xi(m: float, theta: float, c: float) -> float:
    """Entropy rate Xi(m, theta; c); -inf sentinel when infeasible."""
    if c == 0.0:
        return 0.0
    split = salt_split(m, theta, c)
    s_plus = bernoulli_entropy(split.p_plus)
    s_minus = bernoulli_entropy(split.p_minus)
    if math.isinf(s_plus) or math.isinf(s_minus):
        return -math.inf
    return -0.5 * (1.0 + m) * s_plus - 0.5 * (1.0 - m) * s_minus


def count_salt_configs(n: int, M: int, N: int, Q: int) -> int:
    """Exact number of salt placements with totals (N, Q) at spin total M.

    C((n+M)/2, Q) * C((n-M)/2, N-Q), with out-of-range binomials zero.
    """
    if n < 1 or abs(M) > n:
        raise ValueError(f"need 1 <= n and |M| <= n, got n={n}, M={M}")
    if (n + M) % 2 != 0:
        raise ValueError(f"parity violation: n + M = {n + M} is odd")
    n_plus = (n + M) // 2
    n_minus = (n - M) // 2
    if Q < 0 or Q > n_plus or N - Q < 0 or N - Q > n_minus:
        return 0
    return math.comb(n_plus, Q) * math.comb(n_minus, N - Q)


def _log_comb(a: int, b: int) -> float:
    return (math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1))


def log_salt_weight(n: int, M: int, c: float, kappa: float) -> float:
    """log of the amalgamated salt weight sum_Q count(n,M,N,Q) e^{kappa Q}.

    N = floor(c n); evaluated in log-space with a log-sum-exp over Q.
    """
    if (n + M) % 2 != 0:
        raise ValueError(f"parity violation: n + M = {n + M} is odd")
    N = math.floor(c * n)
    n_plus = (n + M) // 2
    n_minus = (n - M) // 2
    if N > n:
        raise InfeasibleConcentrationError(f"N={N} exceeds n={n}")
    q_lo = max(0, N - n_minus)
    q_hi = min(N, n_plus)
    if q_lo > q_hi:
        raise InfeasibleConcentrationError(
            f"no placement of N={N} salt on {n_plus}+/{n_minus}- sites")
    terms = [_log_comb(n_plus, Q) + _log_comb(n_minus, N - Q) + kappa * Q
             for Q in range(q_lo, q_hi + 1)]
    peak = max(terms)
    return peak + math.log(math.fsum(math.exp(t - peak) for t in terms))


def _log_odds(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def optimal_theta(m: float, c: float, kappa: float) -> SaltSplit:
    """The unique feasible theta maximizing kappa*theta*c + Xi(m, theta; c).

    Stationarity is the odds relation odds(p_plus) = e^kappa odds(p_minus);
    solved by monotone bisection in theta.  For kappa = 0 the optimum is
    theta = (1+m)/2 (salt independent of the spins).
    """
    if not -1.0 < m < 1.0:
        raise ValueError(f"m must be in (-1, 1), got {m}")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must be in (0, 1), got {c}")
    if kappa < 0.0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    # feasible window: p_plus <= 1 and p_minus <= 1
    lo = max(0.0, 1.0 - (1.0 - m) / (2.0 * c))
    hi = min(1.0, (1.0 + m) / (2.0 * c))
    if lo > hi:
        raise InfeasibleConcentrationError(
            f"concentration exceeds capacity at m={m}, c={c}")

    def excess(theta: float) -> float:
        split = salt_split(m, theta, c)
        return _log_odds(split.p_plus) - _log_odds(split.p_minus) - kappa

    # excess is strictly increasing in theta: -inf at the lower edge
    # (p_plus -> 0 or p_minus -> 1), +inf at the upper edge
    a, b = lo, hi
    while b - a > _THETA_TOL:
        mid = 0.5 * (a + b)
        if excess(mid) < 0.0:
            a = mid
        else:
            b = mid
    return salt_split(m, 0.5 * (a + b), c)
