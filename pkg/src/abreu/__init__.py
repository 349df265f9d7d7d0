"""Abreu's equation S(u) = A on convex polygons with Guillemin boundary
conditions: canonical potentials, a collocation solver, stability and
conjugate-function diagnostics, section geometry and a verification
harness for the a-priori estimates."""

from .errors import (AbreuError, ConsistencyError, ConvexityError, DivergedError, DomainError,
                     InputError, NonCompactSectionError)
from .polytope import Polygon, boundary_b, measures_and_A, standard_simplex, unit_square
from .potential import SymplecticPotential, canonical_potential, normalize
from .solver import SolveConfig, functional_F, solve
from .stability import CreasedPL, lambda_lower_bound, linfunc
from .conjugate import Conjugate, hamiltonian
from .sections import section_boundary, section_stats
from .ellipse import mvee
from .estimates import VerifyConfig, chi_invariant, verify

__all__ = [
    "AbreuError", "ConsistencyError", "ConvexityError", "DivergedError", "DomainError", "InputError",
    "NonCompactSectionError", "Polygon", "SymplecticPotential", "SolveConfig", "boundary_b",
    "canonical_potential", "functional_F", "measures_and_A", "normalize", "solve", "standard_simplex",
    "unit_square", "CreasedPL", "lambda_lower_bound", "linfunc", "Conjugate", "hamiltonian",
    "section_boundary", "section_stats", "mvee", "VerifyConfig", "chi_invariant", "verify",
]
__version__ = "0.1.0"
