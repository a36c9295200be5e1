"""Exact, finite-horizon realizers for Arzela-Ascoli and Bolzano-Weierstrass.

Everything is computed with rationals; reals in [0,1] are given by dyadic
approximations. See the submodules for the pieces.
"""
from .bw import BinTree, Subsequence, bw_cantor, bw_pair2, bw_product, bw_unit, leftmost_path
from .counterexample import build_family, locate, tilde_nodes, verify_nonuniform
from .encode import bin_expand, embed_F, embed_Fprime, prod_metric, rat_enum, rat_index
from .errors import AscoliError, ResourceBound, SemanticFailure
from .exactnum import Dyadic, Real01, real_from_rational
from .funcspace import FuncSeq, PiecewiseLinear, PointwiseModulus, UniformModulus
from .pipeline import (
    RateCertificate,
    aa_extract_general,
    aa_extract_uniform,
    constant_family_reduction,
    pointwise_to_uniform_rate,
    verify_uniform_rate,
)

__version__ = "0.1.0"
