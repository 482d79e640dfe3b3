"""Resonant Jaynes-Cummings dynamics of a qubit coupled to a coherent field.

Exact reduced dynamics and the photon-count channel, analytic limits,
Bayesian information gain about the initial qubit, and iterative qubit
initialization.
"""

from .core import (BlochVector, CoherentField, EvolutionParams, PureQubit,
                   QubitDensity, bloch_from_pure, density_from_bloch,
                   poisson_weights, purity)
from .dynamics import (KrausSet, apply_channel, bloch_evolve, kraus_set,
                       oracle_evolve, phase_rotated_channel)
from .errors import JCError
from .infogain import (SpherePoint, aig_minus_rsq_surface, aig_surface,
                       average_information_gain, average_state_radius,
                       sphere_grid)
from .initialization import (IterationPlan, ball_image,
                             find_initialization_params, fixed_state_estimate,
                             iterate_channel)

__version__ = "0.1.0"

__all__ = [
    "BlochVector",
    "CoherentField",
    "EvolutionParams",
    "PureQubit",
    "QubitDensity",
    "bloch_from_pure",
    "density_from_bloch",
    "poisson_weights",
    "purity",
    "KrausSet",
    "apply_channel",
    "bloch_evolve",
    "kraus_set",
    "oracle_evolve",
    "phase_rotated_channel",
    "JCError",
    "SpherePoint",
    "aig_minus_rsq_surface",
    "aig_surface",
    "average_information_gain",
    "average_state_radius",
    "sphere_grid",
    "IterationPlan",
    "ball_image",
    "find_initialization_params",
    "fixed_state_estimate",
    "iterate_channel",
]
