"""Degree of homogeneity, Euler residuals and returns-to-scale labels."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .autodiff import Jet2, jet2_batch
from .errors import DomainError, InputError, MathError
from .expr import Expression, evaluate_many
from .grids import quasi_random

DEGREE_TOL = 1e-8
UNIT_DEGREE_TOL = 1e-6
SCALE_FACTORS = (0.5, 2.0, 3.0)
SCALE_POINTS = 10


@dataclass(frozen=True)
class HomogeneityReport:
    is_homogeneous: bool
    degree: float
    euler_residual_max: float
    degree_stddev: float
    returns_to_scale: str  # constant | increasing | decreasing | not-homogeneous
    scaling_error_max: float
    n_points: int


def euler_residual(jet: Jet2, r: float) -> float:
    """``|sum x_i f_i - r f| / (1 + |r f|)``; zero for an r-homogeneous f."""
    lhs = float(np.dot(jet.point, jet.gradient))
    rf = r * jet.value
    return abs(lhs - rf) / (1.0 + abs(rf))


def returns_to_scale(r: float, homogeneous: bool = True, tol: float = UNIT_DEGREE_TOL) -> str:
    if not homogeneous:
        return "not-homogeneous"
    if abs(r - 1.0) <= tol:
        return "constant"
    return "increasing" if r > 1.0 else "decreasing"


def default_grid(n: int, seed: int = 0, count: int = 10, bounds=None) -> np.ndarray:
    return quasi_random(n, count=count, bounds=bounds, seed=seed)


def estimate_degree(expr: Expression, grid=None, tol: float = DEGREE_TOL,
                    unit_tol: float = UNIT_DEGREE_TOL) -> HomogeneityReport:
    """Estimate the degree r from the Euler ratio ``sum x_i f_i / f`` at each point.

    The function is declared homogeneous only if the ratio is constant
    (population standard deviation <= ``tol``) *and* the direct scaling test
    ``|f(t x) - t^r f(x)| <= tol |t^r f(x)|`` holds for t in {0.5, 2, 3} at
    up to 10 points.  Points where f vanishes are skipped.
    """
    if expr.arity < 1:
        raise InputError("homogeneity needs a function of at least one variable")
    pts = default_grid(expr.arity) if grid is None else np.asarray(grid, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("empty sample grid")
    jets = jet2_batch(expr, pts)
    keep = jets.values != 0
    if not np.any(keep):
        raise MathError("f vanishes at every grid point; degree is undefined")
    f = jets.values[keep]
    x = pts[keep]
    ratios = np.einsum("ij,ij->i", x, jets.gradients[keep]) / f
    r = float(np.mean(ratios))
    spread = float(np.std(ratios))

    scaling_error = 0.0
    sample = x[:SCALE_POINTS]
    f_sample = f[:SCALE_POINTS]
    for t in SCALE_FACTORS:
        try:
            scaled = evaluate_many(expr, t * sample)
        except DomainError:
            scaling_error = float("inf")
            break
        expected = t ** r * f_sample
        scaling_error = max(scaling_error, float(np.max(np.abs(scaled - expected) / np.abs(expected))))

    homogeneous = spread <= tol and scaling_error <= tol
    residual = np.abs(np.einsum("ij,ij->i", x, jets.gradients[keep]) - r * f) / (1.0 + np.abs(r * f))
    return HomogeneityReport(
        is_homogeneous=bool(homogeneous),
        degree=r,
        euler_residual_max=float(np.max(residual)),
        degree_stddev=spread,
        returns_to_scale=returns_to_scale(r, homogeneous, unit_tol),
        scaling_error_max=scaling_error,
        n_points=int(keep.sum()),
    )


@dataclass(frozen=True)
class EconomicDiagnostics:
    """Pointwise sign checks on the sample set (informational only).

    ``increasing``: every ``f_i > 0``; ``diminishing``: every ``f_ii < 0``.
    """

    increasing: bool
    diminishing: bool
    min_marginal: float
    max_own_second: float
    first_failure_increasing: Optional[int]
    first_failure_diminishing: Optional[int]


def economic_diagnostics(expr: Expression, grid=None) -> EconomicDiagnostics:
    pts = default_grid(expr.arity) if grid is None else np.asarray(grid, dtype=float)
    jets = jet2_batch(expr, pts)
    own = np.diagonal(jets.hessians, axis1=1, axis2=2)
    inc = np.all(jets.gradients > 0, axis=1)
    dim = np.all(own < 0, axis=1)
    return EconomicDiagnostics(
        increasing=bool(inc.all()),
        diminishing=bool(dim.all()),
        min_marginal=float(jets.gradients.min()),
        max_own_second=float(own.max()),
        first_failure_increasing=None if inc.all() else int(np.flatnonzero(~inc)[0]),
        first_failure_diminishing=None if dim.all() else int(np.flatnonzero(~dim)[0]),
    )
