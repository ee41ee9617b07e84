"""Curvature invariants of graph hypersurfaces and a flatness classifier for
homogeneous production functions."""

__version__ = "0.1.0"

from .autodiff import HyperDual, Jet2, fd_jet2, jet2, jet2_batch
from .classify import Classification, classify, fit_multinomial, solve_profile_ode
from .expr import Expression, evaluate, free_identifiers, parse, to_source
from .families import FamilySpec, build, list_families
from .geometry import (
    UshakovSurface,
    curvature_sweep,
    gk_curvature,
    monge_ampere_residual,
    parametric_gauss_curvature,
    riemann_component,
    riemann_max_abs,
    ushakov_point,
)
from .homogeneity import economic_diagnostics, estimate_degree, euler_residual

__all__ = [
    "Classification", "Expression", "FamilySpec", "HyperDual", "Jet2", "UshakovSurface",
    "build", "classify", "curvature_sweep", "economic_diagnostics", "estimate_degree",
    "euler_residual", "evaluate", "fd_jet2", "fit_multinomial", "free_identifiers", "gk_curvature", "jet2",
    "jet2_batch", "list_families", "monge_ampere_residual", "parametric_gauss_curvature",
    "parse", "riemann_component", "riemann_max_abs", "solve_profile_ode", "to_source",
    "ushakov_point",
]
