"""Equilibrium theory and Monte Carlo validation of a brine lattice model.

Submodules:
    params         physical parameters and the Ising reduction
    magnetization  magnetization models and the canonical free energy
    salt           salt entropy, exact counts and the inner theta optimum
    variational    the variational principle, mole fractions, phase diagram
    lattice        fixed-salt Gibbs sampler and exact-enumeration oracle
    cli            command-line interface
"""

__version__ = "0.1.0"

from .params import (BoundaryCondition, InvalidParamsError, ModelParams,
                     RawParams, effective_field, reduce_to_ising, validate)
from .magnetization import (FreeEnergyCurve, MagnetizationModel,
                            MeanFieldModel, Onsager2DModel, TabulatedModel,
                            free_energy, mean_field_mag, onsager_spontaneous_m,
                            tabulate)
from .salt import (InfeasibleConcentrationError, SaltSplit, bernoulli_entropy,
                   count_salt_configs, log_salt_weight, optimal_theta, xi)
from .variational import (DegenerateMinimizerError, MoleFractions,
                          PhaseBoundary, Region, VariationalSolution, big_g,
                          dilute_check, field_for_m, minimize_g,
                          mole_fractions, phase_boundaries, script_g)
