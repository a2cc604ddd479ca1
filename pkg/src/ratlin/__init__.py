"""Exact structural analysis of rational matrices and their strong linearizations."""
from .exactalg import LAMBDA, Poly, RatFn
from .polymat import PolyMatrix, RatMatrix
from .minbases import MinimalBasis, minimal_basis, oracle_minimal_indices
from .sysmat import CertificationError, PolySystemMatrix, PreconditionError, StateSpaceRealization
from .linearize import Pencil, block_kronecker, build_sbmb, m1_build, m2_build
from .fiedler import FiedlerSpec, build_fiedler_rational, permute_to_extended_kronecker
from .verify import check_strong_linearization, structural_report

__version__ = "0.1.0"
