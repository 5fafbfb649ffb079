"""Sharp weighted L2 Caffarelli-Kohn-Nirenberg inequalities: constants, extremizers, checks."""

from .params import BranchConstants, Params, RegionInfo, branch_constants, classify, sharp_constant
from .profiles import CutoffSpec, ExtremizerSpec, Profile, make_extremizer, make_hardy_sequence
from .functionals import rayleigh_full, rayleigh_tilde, weighted_integrals
from .quadrature import QuadratureConfig, integrate_radial
from .eigmin import Discretization, converge_study, min_quotient

__all__ = [
    "BranchConstants",
    "Params",
    "RegionInfo",
    "branch_constants",
    "classify",
    "sharp_constant",
    "CutoffSpec",
    "ExtremizerSpec",
    "Profile",
    "make_extremizer",
    "make_hardy_sequence",
    "rayleigh_full",
    "rayleigh_tilde",
    "weighted_integrals",
    "QuadratureConfig",
    "integrate_radial",
    "Discretization",
    "converge_study",
    "min_quotient",
]
