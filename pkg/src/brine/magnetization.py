"""Magnetization models and the canonical Ising free energy.

The rate function F_J(m) is defined by integrating the inverse
magnetization map 𝔥(m, J) over the interval [m*, |m|]:

    F(m) = \\int h(m') 1{m* <= m' <= |m|} dm'

The true Ising 𝔥 has no closed form, so the field-to-magnetization map is
pluggable: a mean-field closed form, the exact 2D spontaneous magnetization
combined with a rescaled mean-field map, or a tabulated curve (e.g. measured
by the simulator).  All models expose the same structural properties the
variational theory relies on: a flat piece of F on [-m*, m*], strict
convexity outside it and a field diverging as m -> 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

J_CRIT_2D = 0.5 * math.log(1.0 + math.sqrt(2.0))

# quadrature / inversion tolerances; downstream root-finds compose two
# inversions, so these are kept well below the outer solver tolerances
_QUAD_TOL = 1e-10
_INV_TOL = 1e-14
_EDGE = 1e-12  # hard singular-endpoint guard at |m| > 1 - _EDGE


class MagnetizationDomainError(ValueError):
    """Requested magnetization or field outside the model's domain."""


def mean_field_mag(h: float, J: float, d: int) -> float:
    """Root of m = tanh(2dJ m + h) with the sign of h.

    For h = 0 returns the largest-magnitude stable root with plus sign
    (the h -> 0+ limit), i.e. the mean-field spontaneous magnetization.
    """
    if J < 0:
        raise MagnetizationDomainError(f"J must be >= 0, got {J}")
    if h < 0:
        return -mean_field_mag(-h, J, d)
    a = 2.0 * d * J
    m_star = mean_field_spontaneous(J, d)
    if h == 0.0:
        return m_star
    lo, hi = m_star, 1.0
    # f(lo) < 0, f(hi) > 0; f(m) = m - tanh(a m + h) has a single root here
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - math.tanh(a * mid + h) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < _INV_TOL:
            break
    return 0.5 * (lo + hi)


def mean_field_spontaneous(J: float, d: int) -> float:
    """Largest root of m = tanh(2dJ m); zero when 2dJ <= 1."""
    a = 2.0 * d * J
    if a <= 1.0:
        return 0.0
    lo, hi = 1e-8, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - math.tanh(a * mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < _INV_TOL:
            break
    return 0.5 * (lo + hi)


def onsager_spontaneous_m(J: float) -> float:
    """Exact 2D spontaneous magnetization.

    Zero for J <= J_c = log(1 + sqrt 2)/2, else (1 - sinh(2J)^-4)^(1/8).
    """
    if J < 0:
        raise MagnetizationDomainError(f"J must be >= 0, got {J}")
    if J <= J_CRIT_2D:
        return 0.0
    return (1.0 - math.sinh(2.0 * J) ** -4) ** 0.125


class MagnetizationModel:
    """Interface: spontaneous magnetization m*, 𝔪(h) and its inverse 𝔥(m).

    Implementations are immutable after construction and safe to share
    across threads.
    """

    J: float

    @property
    def spontaneous_m(self) -> float:
        raise NotImplementedError

    def mag_for(self, h: float) -> float:
        """Magnetization at field h; odd in h, mag_for(0) = +m*."""
        raise NotImplementedError

    def field_for(self, m: float) -> float:
        """Unique h >= 0 with mag_for(h) = m, for m in [m*, 1)."""
        raise NotImplementedError

    def free_energy(self, m: float) -> float:
        """Rate function F(m); zero on [-m*, m*], quadrature elsewhere."""
        return free_energy_quadrature(m, self)

    def _check_field_domain(self, m: float) -> float:
        m_star = self.spontaneous_m
        if m >= 1.0:
            raise MagnetizationDomainError(f"m={m} out of domain (m >= 1)")
        if m < m_star - 1e-12:
            raise MagnetizationDomainError(
                f"m={m} inside coexistence interval [-{m_star}, {m_star}]")
        return max(m, m_star)


class MeanFieldModel(MagnetizationModel):
    """Closed-form mean-field magnetization map in dimension d."""

    def __init__(self, J: float, d: int = 2):
        if J < 0:
            raise MagnetizationDomainError(f"J must be >= 0, got {J}")
        self.J = J
        self.d = d
        self._a = 2.0 * d * J
        self._m_star = mean_field_spontaneous(J, d)

    @property
    def spontaneous_m(self) -> float:
        return self._m_star

    def mag_for(self, h: float) -> float:
        return mean_field_mag(h, self.J, self.d)

    def field_for(self, m: float) -> float:
        m = self._check_field_domain(m)
        return math.atanh(m) - self._a * m

    def _phi(self, m: float) -> float:
        # antiderivative of atanh(m) - a m
        return (0.5 * ((1.0 + m) * math.log1p(m) + (1.0 - m) * math.log1p(-m))
                - 0.5 * self._a * m * m)

    def free_energy(self, m: float) -> float:
        if abs(m) >= 1.0:
            raise MagnetizationDomainError(f"|m|={abs(m)} out of domain")
        am = abs(m)
        if am <= self._m_star:
            return 0.0
        return self._phi(am) - self._phi(self._m_star)


class Onsager2DModel(MagnetizationModel):
    """Exact 2D spontaneous magnetization with a mean-field 𝔥 outside it.

    m* is the Onsager closed form.  For |m| > m* there is no exact closed
    form for 𝔥, so the mean-field map at the same J is reused with its
    domain [m*_mf, 1) rescaled affinely onto [m*, 1).  This preserves
    monotonicity, 𝔥(m*) = 0 and divergence at m -> 1.
    """

    def __init__(self, J: float):
        self.J = J
        self._m_star = onsager_spontaneous_m(J)
        self._mf = MeanFieldModel(J, d=2)

    @property
    def spontaneous_m(self) -> float:
        return self._m_star

    def _to_mf(self, m: float) -> float:
        ms, mf = self._m_star, self._mf.spontaneous_m
        return mf + (m - ms) * (1.0 - mf) / (1.0 - ms)

    def _from_mf(self, u: float) -> float:
        ms, mf = self._m_star, self._mf.spontaneous_m
        return ms + (u - mf) * (1.0 - ms) / (1.0 - mf)

    def mag_for(self, h: float) -> float:
        if h < 0:
            return -self.mag_for(-h)
        return self._from_mf(self._mf.mag_for(h))

    def field_for(self, m: float) -> float:
        m = self._check_field_domain(m)
        return self._mf.field_for(min(self._to_mf(m), 1.0 - _EDGE))


class TabulatedModel(MagnetizationModel):
    """Magnetization curve interpolated from (h, m) samples.

    The table covers h >= 0 with h[0] = 0 (its m value is m*) and must be
    strictly increasing in both columns; monotone PCHIP interpolation keeps
    𝔪 increasing between samples.  Negative h uses oddness.
    """

    def __init__(self, h: np.ndarray, m: np.ndarray, J: float = float("nan")):
        from scipy.interpolate import PchipInterpolator

        h = np.asarray(h, dtype=float)
        m = np.asarray(m, dtype=float)
        if h.ndim != 1 or h.shape != m.shape or h.size < 2:
            raise ValueError("need two 1-d columns with at least 2 rows")
        if h[0] != 0.0:
            raise ValueError("table must start at h = 0 (row gives m*)")
        if np.any(np.diff(h) <= 0):
            raise ValueError("h column must be strictly increasing")
        if np.any(np.diff(m) <= 0):
            raise ValueError("m column must be strictly increasing")
        if np.any(np.abs(m) >= 1.0) or m[0] < 0.0:
            raise ValueError("m values must lie in [0, 1)")
        self.J = J
        self._h = h
        self._m = m
        self._interp = PchipInterpolator(h, m)

    @classmethod
    def from_csv(cls, path, J: float = float("nan")) -> "TabulatedModel":
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            if [s.strip() for s in header[:2]] != ["h", "m"]:
                raise ValueError(f"expected header 'h,m', got {header!r}")
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        h, m = zip(*rows)
        return cls(np.array(h), np.array(m), J=J)

    @property
    def spontaneous_m(self) -> float:
        return float(self._m[0])

    def mag_for(self, h: float) -> float:
        if h < 0:
            return -self.mag_for(-h)
        if h > self._h[-1]:
            raise MagnetizationDomainError(
                f"h={h} beyond tabulated range [0, {self._h[-1]}]")
        return float(self._interp(h))

    def field_for(self, m: float) -> float:
        m = self._check_field_domain(m)
        m_max = float(self._m[-1])
        if m > m_max:
            raise MagnetizationDomainError(
                f"m={m} beyond tabulated range [m*, {m_max}]")
        lo, hi = 0.0, float(self._h[-1])
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(self._interp(mid)) < m:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-13 * max(1.0, hi):
                break
        return 0.5 * (lo + hi)


def field_for(m: float, model: MagnetizationModel) -> float:
    """Inverse magnetization map 𝔥(m) of the given model."""
    return model.field_for(m)


def _adaptive_simpson(f, a, b, tol):
    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol, depth):
        x1 = 0.5 * (x0 + x2)
        xl, xr = 0.5 * (x0 + x1), 0.5 * (x1 + x2)
        fl, fr = f(xl), f(xr)
        left = simpson(x0, x1, f0, fl, f1)
        right = simpson(x1, x2, f1, fr, f2)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(x0, x1, f0, fl, f1, left, tol / 2.0, depth - 1)
                + recurse(x1, x2, f1, fr, f2, right, tol / 2.0, depth - 1))

    if b <= a:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    return recurse(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 50)


def free_energy_quadrature(m: float, model: MagnetizationModel,
                           tol: float = _QUAD_TOL) -> float:
    """F(m) by adaptive Simpson quadrature of 𝔥 over [m*, |m|]."""
    if abs(m) >= 1.0:
        raise MagnetizationDomainError(f"|m|={abs(m)} out of domain")
    am = abs(m)
    m_star = model.spontaneous_m
    if am <= m_star:
        return 0.0
    upper = min(am, 1.0 - _EDGE)
    return _adaptive_simpson(model.field_for, m_star, upper, tol)


def free_energy(m: float, model: MagnetizationModel) -> float:
    """Canonical free energy F(m): >= 0, even, zero on the flat piece."""
    return model.free_energy(m)


@dataclass
class FreeEnergyCurve:
    """F sampled on an ascending magnetization grid."""

    grid: np.ndarray
    values: np.ndarray
    m_star: float

    def check_invariants(self, convexity_tol: float = 1e-10) -> None:
        g, v = np.asarray(self.grid), np.asarray(self.values)
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly ascending")
        if np.any(np.abs(g) >= 1.0):
            raise ValueError("grid must lie in (-1, 1)")
        if np.any(v < 0):
            raise ValueError("free energy values must be >= 0")
        flat = np.abs(g) <= self.m_star
        if np.any(v[flat] != 0.0):
            raise ValueError("values must vanish on [-m*, m*]")
        if len(v) >= 3:
            d2 = v[:-2] - 2.0 * v[1:-1] + v[2:]
            if np.any(d2 < -convexity_tol):
                raise ValueError("curve is not convex")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["m", "F"])
            for m, v in zip(self.grid, self.values):
                w.writerow([f"{m:.17g}", f"{v:.17g}"])

    @classmethod
    def from_csv(cls, path, m_star: float) -> "FreeEnergyCurve":
        with open(path, newline="") as f:
            reader = csv.reader(f)
            next(reader)
            rows = [(float(r[0]), float(r[1])) for r in reader if r]
        m, v = zip(*rows)
        return cls(np.array(m), np.array(v), m_star)


def tabulate(model: MagnetizationModel, grid_size: int,
             m_max: float = 0.8) -> FreeEnergyCurve:
    """Evaluate F on a symmetric grid of grid_size points over [-m_max, m_max]."""
    if grid_size < 3:
        raise ValueError(f"grid_size must be >= 3, got {grid_size}")
    grid = np.linspace(-m_max, m_max, grid_size)
    values = np.array([model.free_energy(m) for m in grid])
    return FreeEnergyCurve(grid, values, model.spontaneous_m)
