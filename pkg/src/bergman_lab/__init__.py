"""Numerical laboratory for weighted Bergman spaces on the unit ball of C^n."""
from .kernels import BACKEND
from .geometry import (BergmanBall, CarlesonTube, bergman_metric, mobius, noniso_dist, phi_norm2)
from .measures import Estimate, QuadSpec, WeightedMeasure, integrate_ball, integrate_bergman_ball
from .holo import HoloFunc, SampledFunction, invariant_gradient_norm, radial_derivative
from .lattice import Lattice, build_lattice
from .operators import SpaceParams, bergman_norm, bloch_norm, equivalence_experiment
from .atoms import TubeAtom, atom_projection_norm, cr_atom, cr_synthesize, make_tube_atom

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BergmanBall", "CarlesonTube", "Estimate", "HoloFunc", "Lattice", "QuadSpec",
    "SampledFunction", "SpaceParams", "TubeAtom", "WeightedMeasure", "atom_projection_norm",
    "bergman_metric", "bergman_norm", "bloch_norm", "build_lattice", "cr_atom", "cr_synthesize",
    "equivalence_experiment", "integrate_ball", "integrate_bergman_ball", "invariant_gradient_norm",
    "make_tube_atom", "mobius", "noniso_dist", "phi_norm2", "radial_derivative",
]
