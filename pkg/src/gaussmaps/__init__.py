"""Gauss maps of minimal-type surfaces: conformal metrics, value distribution
checks, and numerical surface construction from Weierstrass-type data."""

from .errors import GaussMapError, MathError
from .mero import INF, MeroExpr, OneForm, Z
from .metric import MetricSpec, RamificationProfile
from .mesh import DomainSpec, build_mesh

__all__ = [
    "GaussMapError",
    "MathError",
    "INF",
    "MeroExpr",
    "OneForm",
    "Z",
    "MetricSpec",
    "RamificationProfile",
    "DomainSpec",
    "build_mesh",
]
