"""Model parameters and the reduction of the solvent-solute Hamiltonian.

The microscopic model has ice/liquid indicators coupled by nearest-neighbor
attractions and a salt variable penalized for sitting on ice.  Everything
downstream works with the Ising form: coupling J, field h, salt-ice
repulsion kappa and a fixed salt concentration c.  The inverse temperature
is absorbed into the parameters and never appears on its own.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace


class InvalidParamsError(ValueError):
    """A parameter violates its invariant; message names the field."""


class BoundaryCondition(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def spin(self) -> int:
        return 1 if self is BoundaryCondition.PLUS else -1

    @classmethod
    def from_string(cls, s: str) -> "BoundaryCondition":
        try:
            return cls(s.lower())
        except ValueError:
            raise InvalidParamsError(f"bc must be 'plus' or 'minus', got {s!r}")


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters shared by every computation.

    J: ferromagnetic coupling, >= 0
    h: external field, any real
    kappa: salt-ice repulsion, finite and >= 0
    c: salt concentration, in [0, 1)
    d: lattice dimension, integer >= 1
    bc: boundary condition (frozen shell of +1 or -1 spins)
    """

    J: float
    h: float
    kappa: float
    c: float
    d: int = 2
    bc: BoundaryCondition = BoundaryCondition.PLUS

    def replace(self, **kw) -> "ModelParams":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {"J": self.J, "h": self.h, "kappa": self.kappa,
                "c": self.c, "d": self.d, "bc": self.bc.value}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelParams":
        try:
            bc = obj.get("bc", "plus")
            params = cls(J=float(obj["J"]), h=float(obj["h"]),
                         kappa=float(obj["kappa"]), c=float(obj["c"]),
                         d=int(obj.get("d", 2)),
                         bc=BoundaryCondition.from_string(bc)
                         if isinstance(bc, str) else bc)
        except KeyError as exc:
            raise InvalidParamsError(f"missing parameter {exc.args[0]!r}")
        return validate(params)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class RawParams:
    """Parameters of the general solvent-solute Hamiltonian.

    alpha_ice / alpha_liquid: nearest-neighbor ice-ice / liquid-liquid
    attractions; mu_liquid / mu_salt: fugacities; kappa: salt-ice repulsion.
    """

    alpha_ice: float
    alpha_liquid: float
    mu_liquid: float
    mu_salt: float
    kappa: float
    d: int


def reduce_to_ising(raw: RawParams) -> tuple[float, float]:
    """Map the raw attraction/fugacity parameters to Ising (J, h).

    J = (alpha_liquid + alpha_ice) / 4
    h = (d/2) (alpha_liquid - alpha_ice) + mu_liquid / 2
    """
    for name in ("alpha_ice", "alpha_liquid", "mu_liquid"):
        if not math.isfinite(getattr(raw, name)):
            raise InvalidParamsError(f"{name} must be finite")
    J = (raw.alpha_liquid + raw.alpha_ice) / 4.0
    h = raw.d / 2.0 * (raw.alpha_liquid - raw.alpha_ice) + raw.mu_liquid / 2.0
    return J, h


def _softplus(x: float) -> float:
    # log(1 + e^x), stable for large |x|
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def effective_field(h: float, mu_salt: float, kappa: float) -> float:
    """Field seen by the spins after integrating out grand-canonical salt.

    h_eff = h + (1/2) log[(1 + e^{mu_salt}) / (1 + e^{mu_salt - kappa})].

    Documents the grand-canonical picture that the fixed-concentration
    ensemble replaces; kept only for reference and sanity checks.
    """
    return h + 0.5 * (_softplus(mu_salt) - _softplus(mu_salt - kappa))


def validate(params: ModelParams) -> ModelParams:
    """Return params unchanged if every invariant holds, else raise."""
    if not math.isfinite(params.J) or params.J < 0:
        raise InvalidParamsError(f"J must be finite and >= 0, got {params.J}")
    if not math.isfinite(params.h):
        raise InvalidParamsError(f"h must be finite, got {params.h}")
    if not math.isfinite(params.kappa):
        # infinite kappa (hard salt-ice exclusion) is out of scope
        raise InvalidParamsError(f"kappa must be finite, got {params.kappa}")
    if params.kappa < 0:
        raise InvalidParamsError(f"kappa negative: {params.kappa}")
    if not (0.0 <= params.c < 1.0):
        raise InvalidParamsError(f"c out of [0,1): {params.c}")
    if int(params.d) != params.d or params.d < 1:
        raise InvalidParamsError(f"d must be an integer >= 1, got {params.d}")
    if not isinstance(params.bc, BoundaryCondition):
        raise InvalidParamsError(f"bc must be a BoundaryCondition, got {params.bc!r}")
    return params
