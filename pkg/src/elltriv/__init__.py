"""Trivializations of flat bundles over elliptic curves and matrix zero-pole interpolation."""
from .config import DEFAULT, NumericConfig, load_config
from .divisors import BaseDivisor, MatrixDivisor
from .errors import (ConstructionError, ContourError, ElltrivError, IndeterminateError, PoleError,
                     StripError)
from .interpolate import NoSolution, build_gamma, solve_first, solve_second_existence
from .kernels_g1 import CanonicalFunctions, FlatLineBundle, prime_form
from .nullpole import SylvesterDataSet, check_simple_structure, membership
from .theta import ThetaEvaluator
from .torus import EllipticCurve, TorusPoint, reduce
from .trivialize import block_theta_triv, extend_trivialization, single_pole_triv, verify_automorphy

__version__ = "0.1.0"

__all__ = [
    "DEFAULT", "NumericConfig", "load_config", "BaseDivisor", "MatrixDivisor", "ConstructionError",
    "ContourError", "ElltrivError", "IndeterminateError", "PoleError", "StripError", "NoSolution",
    "build_gamma", "solve_first", "solve_second_existence", "CanonicalFunctions", "FlatLineBundle",
    "prime_form", "SylvesterDataSet", "check_simple_structure", "membership", "ThetaEvaluator",
    "EllipticCurve", "TorusPoint", "reduce", "block_theta_triv", "extend_trivialization",
    "single_pole_triv", "verify_automorphy",
]
