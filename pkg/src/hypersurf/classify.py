"""Decide which homogeneous functions have flat graph hypersurfaces.

A homogeneous f of degree r has a flat graph exactly when r = 1 or
f = (c . x)^r.  :func:`classify` measures this on a sample grid: the degree
from :mod:`hypersurf.homogeneity`, flatness and Gauss-Kronecker curvature
from :mod:`hypersurf.geometry`, and the normal form ``(c . x)^r`` by
:func:`fit_multinomial`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .autodiff import HyperDual, jet2_batch
from .errors import ConstraintError, DegenerateError, DomainError, InputError
from .expr import Expression, _check_point, evaluate_many
from .geometry import FLAT_TOL, GK_TOL, CurvatureSweep, curvature_sweep
from .grids import default_resolution, lattice
from .homogeneity import DEGREE_TOL, UNIT_DEGREE_TOL, HomogeneityReport, default_grid, estimate_degree

FIT_TOL = 1e-6
FLAT_FRACTION = 0.99
OUTLIER_FACTOR = 10.0

VERDICTS = ("LinearlyHomogeneousFlat", "MultinomialPower", "NotFlat", "NotHomogeneous")


@dataclass(frozen=True)
class Tolerances:
    flat: float = FLAT_TOL
    gk: float = GK_TOL
    degree: float = DEGREE_TOL
    unit_degree: float = UNIT_DEGREE_TOL
    fit: float = FIT_TOL


@dataclass(frozen=True, eq=False)
class MultinomialFit:
    coefficients: np.ndarray
    degree: float
    residual: float
    base_point: np.ndarray


@dataclass(frozen=True, eq=False)
class Classification:
    verdict: str
    degree: float
    coefficients: Optional[np.ndarray]
    fit_residual: Optional[float]
    gk_zero_but_not_flat: bool
    flat: bool
    gk_zero: bool
    flat_fraction: float
    gk_zero_fraction: float
    max_flat_ratio: float
    homogeneity: HomogeneityReport
    developable: Optional[bool] = None
    economics: Optional[str] = None
    notes: list = field(default_factory=list)


def _is_integer(r: float) -> bool:
    return float(r).is_integer()


def _multinomial_values(c: np.ndarray, r: float, points: np.ndarray) -> np.ndarray:
    """``(c . x)^r`` with real-power semantics; nan where undefined."""
    s = points @ c
    if _is_integer(r):
        with np.errstate(all="ignore"):
            return np.power(s, r)
    with np.errstate(all="ignore"):
        return np.where(s > 0, np.power(np.where(s > 0, s, 1.0), r), np.nan)


def _canonical_sign(c: np.ndarray, r: float) -> np.ndarray:
    # flipping c changes (c.x)^r only for even integer r; only then is the sign free
    if not (_is_integer(r) and int(r) % 2 == 0):
        return c
    big = np.abs(c) > 1e-12 * np.max(np.abs(c))
    first = int(np.flatnonzero(big)[0])
    return -c if c[first] < 0 else c


def fit_multinomial(expr: Expression, r: float, base_point=None, grid=None) -> MultinomialFit:
    """Fit ``f = (c . x)^r`` from the gradient direction at a base point.

    ``c`` is parallel to grad f (gradient proportionality of the normal
    form); its length is fixed by matching ``f(base) = (c . base)^r``.
    The residual is ``max |f - (c . x)^r| / (1 + |f|)`` over ``grid``.
    When no base point is given, the grid point with the largest gradient
    is used.
    """
    if abs(r - 1.0) <= UNIT_DEGREE_TOL:
        raise InputError("multinomial fit needs r != 1 (degree-1 functions are all flat)")
    if r == 0:
        raise InputError("multinomial fit needs r != 0")
    pts = default_grid(expr.arity) if grid is None else np.asarray(grid, dtype=float)
    if base_point is None:
        jets = jet2_batch(expr, pts)
        k = int(np.argmax(np.linalg.norm(jets.gradients, axis=1)))
        base = pts[k]
        grad, f0 = jets.gradients[k], float(jets.values[k])
    else:
        base = _check_point(expr, base_point)
        jet = jet2_batch(expr, base[None, :])[0]
        grad, f0 = jet.gradient, jet.value

    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        raise DegenerateError("gradient vanishes at the base point; direction of c is undetermined")
    u = grad / norm
    s = float(u @ base)
    if s == 0.0:
        raise DegenerateError("gradient is orthogonal to the base point; cannot scale c")
    if _is_integer(r) and int(r) % 2 == 1:
        root = math.copysign(abs(f0) ** (1.0 / r), f0)
    else:
        if f0 <= 0:
            raise DegenerateError(f"f(base) = {f0:.17g} has no real r-th root for r = {r}")
        root = f0 ** (1.0 / r)
    if not _is_integer(r) and s <= 0:
        raise DegenerateError("c . base <= 0 with a fractional degree; the normal form is undefined here")
    c = _canonical_sign(u * (root / s), r)

    f = evaluate_many(expr, pts)
    model = _multinomial_values(c, r, pts)
    err = np.abs(f - model) / (1.0 + np.abs(f))
    residual = float(np.max(err)) if np.all(np.isfinite(err)) else float("inf")
    return MultinomialFit(c, float(r), residual, base)


def snap_degree(r: float, tol: float = DEGREE_TOL) -> float:
    """Round an estimated degree to the nearest integer when within ``tol``."""
    nearest = round(r)
    return float(nearest) if abs(r - nearest) <= tol else float(r)


def _verdict_flags(sweep: CurvatureSweep):
    flat_fraction = float(np.mean(sweep.flat_flags))
    max_ratio = float(np.max(sweep.flat_ratio))
    flat = flat_fraction >= FLAT_FRACTION and max_ratio <= OUTLIER_FACTOR
    gk_fraction = float(np.mean(sweep.gk_zero_flags))
    return flat, flat_fraction, max_ratio, gk_fraction == 1.0, gk_fraction


def classify(expr: Expression, grid=None, curvature_grid=None, tol: Tolerances = Tolerances(),
             convention: str = "paper", sweep: Optional[CurvatureSweep] = None) -> Classification:
    """Classify the graph of ``expr`` as flat or not, and explain why.

    ``grid`` is the (quasi-random) sample for degree estimation and the
    normal-form fit; ``curvature_grid`` the (regular) sample for flatness
    and Gauss-Kronecker sweeps.  Both default to boxes in [0.5, 2]^n.
    """
    n = expr.arity
    if n < 2:
        raise InputError("classification needs at least 2 variables")
    pts = default_grid(n) if grid is None else np.asarray(grid, dtype=float)
    if sweep is None:
        cpts = lattice(n, default_resolution(n)) if curvature_grid is None else curvature_grid
        sweep = curvature_sweep(expr, cpts, convention, tol.flat, tol.gk)

    hom = estimate_degree(expr, pts, tol.degree, tol.unit_degree)
    flat, flat_fraction, max_ratio, gk_zero, gk_fraction = _verdict_flags(sweep)
    r = snap_degree(hom.degree, tol.degree)
    notes = []
    coefficients = None
    residual = None

    if not hom.is_homogeneous:
        verdict = "NotHomogeneous"
    elif flat and abs(r - 1.0) <= tol.unit_degree:
        verdict = "LinearlyHomogeneousFlat"
    elif flat:
        try:
            fit = fit_multinomial(expr, r, grid=pts)
        except (DegenerateError, DomainError) as exc:
            fit = None
            notes.append(f"multinomial fit failed: {exc}")
        if fit is not None:
            coefficients, residual = fit.coefficients, fit.residual
        if fit is not None and residual <= tol.fit:
            verdict = "MultinomialPower"
        else:
            verdict = "NotFlat"
            notes.append("flat on the grid but no (c . x)^r normal form fits; reported as not flat")
    else:
        verdict = "NotFlat"
        if abs(r - 1.0) <= tol.unit_degree and hom.is_homogeneous:
            notes.append(
                f"degree 1 but measured non-flat (n = {n}): curvature components exceed the flat "
                f"tolerance by up to {max_ratio:.3g}x; degree 1 alone does not force flatness here"
            )

    gk_not_flat = bool(gk_zero and not flat)
    developable = economics = None
    if n == 2:
        developable = bool(gk_zero)
        if verdict == "LinearlyHomogeneousFlat":
            economics = "constant return to scale"
        elif verdict == "MultinomialPower":
            economics = "binomial"
    return Classification(
        verdict=verdict, degree=r, coefficients=coefficients, fit_residual=residual,
        gk_zero_but_not_flat=gk_not_flat, flat=bool(flat), gk_zero=bool(gk_zero),
        flat_fraction=flat_fraction, gk_zero_fraction=gk_fraction, max_flat_ratio=max_ratio,
        homogeneity=hom, developable=developable, economics=economics, notes=notes,
    )


# ---------------------------------------------------------------------------
# Profile ODE  u w' = w - w^2 / r

@dataclass(frozen=True, eq=False)
class ProfileSolution:
    """Numeric and closed-form solutions of ``u w' - w + w^2/r = 0``.

    Closed form ``w = r u / (u + r c)``; it corresponds to the profile
    ``h(u) = (c1 u + c2)^r`` with ``(c1, c2) = (1, r c)`` up to scale.
    """

    r: float
    c: float
    u: np.ndarray
    w_numeric: np.ndarray
    w_closed: np.ndarray
    steps: int
    local_error: float

    @property
    def max_error(self) -> float:
        return float(np.max(np.abs(self.w_numeric - self.w_closed)))

    @property
    def profile_coefficients(self) -> tuple[float, float]:
        return 1.0, self.r * self.c

    def closed(self, u):
        return closed_form_w(self.r, self.c, u)


def closed_form_w(r: float, c: float, u):
    return r * u / (u + r * c)


def profile_ode_residual(r: float, c: float, u: float) -> float:
    """``u w' - w + w^2 / r`` for the closed form, with ``w'`` from a dual pass."""
    U = HyperDual(float(u), 1.0, 0.0, 0.0)
    w = closed_form_w(r, c, U)
    return float(u * w.b - w.a + w.a ** 2 / r)


def _rhs(u, w, r):
    return (w - w * w / r) / u


def _rk4_step(u, w, h, r):
    k1 = _rhs(u, w, r)
    k2 = _rhs(u + h / 2, w + h / 2 * k1, r)
    k3 = _rhs(u + h / 2, w + h / 2 * k2, r)
    k4 = _rhs(u + h, w + h * k3, r)
    return w + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(u0, w0, h, steps, r):
    u = u0 + h * np.arange(steps + 1)
    w = np.empty(steps + 1)
    w[0] = w0
    for k in range(steps):
        w[k + 1] = _rk4_step(u[k], w[k], h, r)
    return u, w


def _local_error(u, w, h, r):
    """Step-doubling estimate of the RK4 local error along a trajectory."""
    worst = 0.0
    for k in range(len(u) - 1):
        full = _rk4_step(u[k], w[k], h, r)
        half = _rk4_step(u[k] + h / 2, _rk4_step(u[k], w[k], h / 2, r), h / 2, r)
        worst = max(worst, abs(full - half) * 16.0 / 15.0)
    return worst


def solve_profile_ode(r: float, c: float, u_range=(0.1, 2.0), local_tol: float = 1e-10,
                      max_steps: int = 1 << 16) -> ProfileSolution:
    """Integrate ``u w' = w - w^2/r`` with fixed-step RK4 and compare to the closed form.

    Starts from the closed-form value at the left end of ``u_range``.  The
    step count is doubled from 64 until the estimated local error per step
    is below ``local_tol``.
    """
    r, c = float(r), float(c)
    u0, u1 = (float(v) for v in u_range)
    if r == 0 or not math.isfinite(r):
        raise ConstraintError("r ≠ 0 required")
    if not (math.isfinite(u0) and math.isfinite(u1) and u0 < u1):
        raise ConstraintError(f"u range must satisfy min < max, got {(u0, u1)}")
    if u0 <= 0 <= u1:
        raise ConstraintError("u range must not contain 0 (the equation is singular there)")
    pole = -r * c
    if u0 <= pole <= u1:
        raise DomainError(f"closed form has a pole at u = {pole:.17g} inside the range")

    w0 = closed_form_w(r, c, u0)
    steps = 64
    while True:
        h = (u1 - u0) / steps
        u, w = _integrate(u0, w0, h, steps, r)
        err = _local_error(u, w, h, r)
        if err < local_tol or steps >= max_steps:
            break
        steps *= 2
    if not np.all(np.isfinite(w)):
        raise DomainError("numeric trajectory is not finite")
    return ProfileSolution(r, c, u, w, closed_form_w(r, c, u), steps, err)
