"""Coverings of quivers with potential: truncated Jacobian algebras, Euler
characteristics of quiver Grassmannians and wall-crossing operators."""

from .covering import QuiverCovering, SheetLabeling, compose_coverings, compute_sheet_labeling, cyclic_cover
from .errors import (InconclusiveError, ParseError, PreconditionError, QPError, ResourceError, StructureError,
                     ValidationError)
from .jacobian import Module, ProjectiveModule, TruncatedJacobianAlgebra, build_truncated_jacobian, supports
from .quiver import Element, Path, Potential, Quiver, cyclic_derivative
from .seeds import Seed, SeedCovering, principal_seed, seed_covering, seed_from_quiver

__version__ = "0.1.0"
