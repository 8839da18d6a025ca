"""The variational principle, mole fractions and the phase diagram.

The rate function for the magnetization at fixed salt concentration is

    G(m) = inf_theta [ -h m - kappa theta c - Xi(m, theta; c) + F(m) ]

which is finite and strictly convex for kappa c > 0, so it has a unique
minimizer m(h, c).  The minimizer solves the stationarity equation

    (1/2) log[(1 - q_plus)/(1 - q_minus)] + F'(m) = h

where (q_plus, q_minus) are the mole fractions of salt on plus/minus spins,
the unique solution of the odds relation odds(q_plus) = e^kappa
odds(q_minus) under the mass balance q_plus (1+m)/2 + q_minus (1-m)/2 = c.
Setting m = +-m* yields the freezing-point-depression boundaries h_pm(c)
of the phase-separation band.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .magnetization import MagnetizationModel
from .params import BoundaryCondition, ModelParams, validate
from .salt import InfeasibleConcentrationError, optimal_theta, xi

_Q_TOL = 1e-12
_M_TOL = 1e-10
_M_EDGE = 1e-9


class DegenerateMinimizerError(ValueError):
    """kappa c = 0 and h = 0 above criticality: any m in [-m*, m*] minimizes."""


class CoexistenceDomainError(ValueError):
    """Operation needs |m| <= m* (the flat piece of F)."""


class NoCoexistenceError(ValueError):
    """m* = 0: no phase-separation band below the critical coupling."""


class Region(enum.Enum):
    LIQUID = "liquid"
    ICE = "ice"
    PHASE_SEPARATION = "phase_separation"


@dataclass(frozen=True)
class MoleFractions:
    """Solution (q_plus, q_minus) of the mole-fraction system at (m, c, kappa)."""

    q_plus: float
    q_minus: float
    m: float
    c: float
    kappa: float

    @property
    def field(self) -> float:
        """h = (1/2) log[(1 - q_plus)/(1 - q_minus)]."""
        return 0.5 * (math.log1p(-self.q_plus) - math.log1p(-self.q_minus))


@dataclass(frozen=True)
class VariationalSolution:
    m: float
    theta: float
    value: float
    p_plus: float
    p_minus: float
    region: Region
    droplet_fraction: float

    def to_dict(self) -> dict:
        return {"m": self.m, "theta": self.theta, "value": self.value,
                "q_plus": self.p_plus, "q_minus": self.p_minus,
                "region": self.region.value,
                "droplet_fraction": self.droplet_fraction}


@dataclass
class PhaseBoundary:
    """Rows (c, h_minus, h_plus) with c ascending."""

    rows: list[tuple[float, float, float]]

    def to_csv_rows(self) -> list[list[str]]:
        out = [["c", "h_minus", "h_plus"]]
        for c, h_minus, h_plus in self.rows:
            out.append([f"{c:.17g}", f"{h_minus:.17g}", f"{h_plus:.17g}"])
        return out


def mole_fractions(m: float, c: float, kappa: float) -> MoleFractions:
    """Solve the odds relation + mass balance by bisection in q_plus."""
    if not -1.0 < m < 1.0:
        raise ValueError(f"m must be in (-1, 1), got {m}")
    if not 0.0 <= c < 1.0:
        raise InfeasibleConcentrationError(f"c out of [0, 1): {c}")
    if c == 0.0:
        return MoleFractions(0.0, 0.0, m, c, kappa)

    a = 0.5 * (1.0 + m)
    b = 0.5 * (1.0 - m)
    ek = math.exp(-kappa)

    def minus_of(q_plus: float) -> float:
        r_minus = q_plus / (1.0 - q_plus) * ek
        return r_minus / (1.0 + r_minus)

    # mass balance is strictly increasing in q_plus: -c at 0, 1-c > 0 at 1
    lo, hi = 0.0, 1.0
    while hi - lo > _Q_TOL:
        mid = 0.5 * (lo + hi)
        if a * mid + b * minus_of(mid) < c:
            lo = mid
        else:
            hi = mid
    q_plus = 0.5 * (lo + hi)
    return MoleFractions(q_plus, minus_of(q_plus), m, c, kappa)


def field_for_m(m: float, c: float, kappa: float,
                m_star: float) -> float:
    """Field h with m(h, c) = m, valid on the flat piece |m| <= m*."""
    if abs(m) > m_star + 1e-12:
        raise CoexistenceDomainError(
            f"|m|={abs(m)} outside coexistence interval [-{m_star}, {m_star}]; "
            "use minimize_g inverse")
    return mole_fractions(m, c, kappa).field


def script_g(m: float, theta: float, params: ModelParams,
             model: MagnetizationModel) -> float:
    """The joint functional -h m - kappa theta c - Xi + F; +inf if infeasible."""
    if abs(m) >= 1.0:
        return math.inf
    entropy = xi(m, theta, params.c)
    if math.isinf(entropy):
        return math.inf
    return (-params.h * m - params.kappa * theta * params.c - entropy
            + model.free_energy(m))


def big_g(m: float, params: ModelParams, model: MagnetizationModel) -> float:
    """G(m): the inner theta-optimum of script_g; -h m + F(m) when c = 0."""
    if not -1.0 < m < 1.0:
        raise ValueError(f"m must be in (-1, 1), got {m}")
    if params.c == 0.0:
        return -params.h * m + model.free_energy(m)
    split = optimal_theta(m, params.c, params.kappa)
    return script_g(m, split.theta, params, model)


def _f_prime(m: float, model: MagnetizationModel) -> float:
    """Derivative of F: zero on the flat piece, sign(m) 𝔥(|m|) outside."""
    m_star = model.spontaneous_m
    if abs(m) <= m_star:
        return 0.0
    return math.copysign(model.field_for(abs(m)), m)


def _stationarity(m: float, c: float, kappa: float,
                  model: MagnetizationModel) -> float:
    return mole_fractions(m, c, kappa).field + _f_prime(m, model)


def _classify(m: float, m_star: float, bc: BoundaryCondition
              ) -> tuple[Region, float]:
    if m >= m_star - 1e-12:
        region = Region.LIQUID
    elif m <= -m_star + 1e-12:
        region = Region.ICE
    else:
        region = Region.PHASE_SEPARATION
    if m_star <= 0.0:
        return region, 0.0
    # lever rule: droplet phase opposes the boundary condition
    if bc is BoundaryCondition.PLUS:
        lam = (m_star - m) / (2.0 * m_star)
    else:
        lam = (m_star + m) / (2.0 * m_star)
    return region, min(max(lam, 0.0), 1.0)


def minimize_g(params: ModelParams, model: MagnetizationModel,
               tol: float = _M_TOL) -> VariationalSolution:
    """Unique minimizer of G via bisection on the stationarity map.

    The map m -> (1/2) log[(1-q_plus)/(1-q_minus)] + F'(m) is strictly
    increasing, so its root at level h is the minimizer.  The degenerate
    flat case (kappa c = 0, h = 0, m* > 0) has no unique minimizer and
    raises instead of silently picking one.
    """
    validate(params)
    m_star = model.spontaneous_m
    c, h, kappa = params.c, params.h, params.kappa

    if c == 0.0 or kappa == 0.0:
        if h == 0.0 and m_star > 0.0:
            raise DegenerateMinimizerError(
                "non-unique minimizer on [-m*, m*]: kappa*c = 0 and h = 0")
        m = model.mag_for(h) if h != 0.0 else 0.0
        theta = 0.5 * (1.0 + m)
        p = 0.0 if c == 0.0 else c  # kappa = 0 splits salt evenly: p+ = p- = c
        region, lam = _classify(m, m_star, params.bc)
        return VariationalSolution(m, theta, big_g(m, params, model),
                                   p, p, region, lam)

    lo, hi = -1.0 + _M_EDGE, 1.0 - _M_EDGE
    if _stationarity(lo, c, kappa, model) >= h:
        m = lo  # field beyond the resolvable range; minimizer pinned at edge
    elif _stationarity(hi, c, kappa, model) <= h:
        m = hi
    else:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _stationarity(mid, c, kappa, model) < h:
                lo = mid
            else:
                hi = mid
        m = 0.5 * (lo + hi)

    split = optimal_theta(m, c, kappa)
    region, lam = _classify(m, m_star, params.bc)
    return VariationalSolution(m, split.theta, big_g(m, params, model),
                               split.p_plus, split.p_minus, region, lam)


def phase_boundaries(c_grid, J: float, kappa: float,
                     model: MagnetizationModel) -> PhaseBoundary:
    """Trace h_pm(c) = field at m = +-m* over an ascending c grid."""
    m_star = model.spontaneous_m
    if m_star <= 0.0:
        raise NoCoexistenceError(
            f"no coexistence below J_c: spontaneous magnetization is 0 at J={J}")
    rows = []
    for c in c_grid:
        if c == 0.0:
            rows.append((0.0, 0.0, 0.0))
        else:
            h_plus = field_for_m(m_star, c, kappa, m_star)
            h_minus = field_for_m(-m_star, c, kappa, m_star)
            rows.append((float(c), h_minus, h_plus))
    return PhaseBoundary(rows)


def dilute_check(c: float, J: float, kappa: float,
                 model: MagnetizationModel) -> tuple[float, float]:
    """Return (2 h_plus(c), q_minus - q_plus) at m = m*.

    The two agree to second order in c; this is the classical
    freezing-point-depression relation 2h ~ q_minus - q_plus.
    """
    m_star = model.spontaneous_m
    if c == 0.0 or kappa == 0.0:
        return 0.0, 0.0
    q = mole_fractions(m_star, c, kappa)
    return 2.0 * q.field, q.q_minus - q.q_plus


def classify(h: float, c: float, kappa: float,
             model: MagnetizationModel) -> Region:
    """Region of the (h, c) point, via the boundary fields at m = +-m*."""
    m_star = model.spontaneous_m
    if m_star <= 0.0:
        raise NoCoexistenceError("no coexistence below J_c")
    if c == 0.0 or kappa == 0.0:
        if h > 0.0:
            return Region.LIQUID
        if h < 0.0:
            return Region.ICE
        return Region.PHASE_SEPARATION
    h_plus = field_for_m(m_star, c, kappa, m_star)
    h_minus = field_for_m(-m_star, c, kappa, m_star)
    if h >= h_plus:
        return Region.LIQUID
    if h <= h_minus:
        return Region.ICE
    return Region.PHASE_SEPARATION
