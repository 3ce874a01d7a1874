"""cglforge: complex Ginzburg-Landau amplitude equations for generalized
Turing bifurcations.

Pipeline: describe a reaction-diffusion-convection system (ModelSpec), verify
the Turing hypotheses and locate the critical point, compute the cGL
coefficients including the Landau constant, then cross-validate the predicted
periodic-wave family against a Fourier-Galerkin Newton solver and direct
pseudospectral time evolution.
"""

__version__ = "0.1.0"

from .errors import CglforgeError
from .linalg import EigenTriple, eigen_triple, eigenvalue_curvature, inverse_norm

__all__ = [
    "__version__",
    "CglforgeError",
    "EigenTriple",
    "eigen_triple",
    "eigenvalue_curvature",
    "inverse_norm",
]
