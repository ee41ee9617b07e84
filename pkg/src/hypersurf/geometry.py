"""Curvature of graph hypersurfaces ``z = f(x_1, ..., x_n)`` and of
parametrised developable surfaces.

For a graph with gradient ``f_i`` and Hessian ``f_ij``, ``w = sqrt(1 + |grad f|^2)``:

* Gauss-Kronecker curvature ``K = det(f_ij) / w**(n + 2)``;
* curvature components ``(f_il f_jk - f_ik f_jl) / w**p`` with ``p = 4``
  (``convention="paper"``) or ``p = 2`` (``convention="gauss"``, the value
  obtained from the Gauss equation with second fundamental form
  ``f_ij / w``).  Flatness verdicts do not depend on ``p``.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .autodiff import HyperDual, Jet2, jet2_batch, real_part, univariate_derivatives
from .errors import DegenerateError, DomainError, InputError, QuadratureError
from .expr import Expression, evaluate
from .grids import map_chunks

FLAT_TOL = 1e-9
GK_TOL = 1e-10
METRIC_TOL = 1e-14
CONVENTIONS = {"paper": 4, "gauss": 2}


def _w_power(convention: str) -> int:
    try:
        return CONVENTIONS[convention]
    except KeyError:
        raise InputError(f"convention must be one of {sorted(CONVENTIONS)}, got {convention!r}") from None


# ---------------------------------------------------------------------------
# Pointwise invariants of a graph

@dataclass(frozen=True, eq=False)
class CurvatureSample:
    point: np.ndarray
    K: float
    w: float
    hessian_det: float
    riemann_max_abs: float
    monge_ampere_residual: Optional[float] = None


def hessian_det(jet: Jet2) -> float:
    # LAPACK getrf: LU with partial pivoting
    return float(np.linalg.det(jet.hessian))


def gk_curvature(jet: Jet2) -> float:
    """Gauss-Kronecker curvature ``det(Hess f) / w**(n+2)``.

    >>> from hypersurf.expr import parse
    >>> from hypersurf.autodiff import jet2
    >>> gk_curvature(jet2(parse("sqrt(1 - x^2 - y^2)", ["x", "y"]), [0, 0]))
    1.0
    """
    return hessian_det(jet) / jet.w ** (jet.n + 2)


def gk_relative(jet: Jet2) -> float:
    """Scale-free size of ``det(Hess f)``: ``|det| / (1 + max|f_ij|)**n``."""
    return abs(hessian_det(jet)) / (1.0 + float(np.max(np.abs(jet.hessian)))) ** jet.n


def riemann_component(jet: Jet2, i: int, j: int, k: int, l: int, convention: str = "paper") -> float:
    """``(f_il f_jk - f_ik f_jl) / w**p`` with zero-based indices."""
    n = jet.n
    for idx in (i, j, k, l):
        if not 0 <= idx < n:
            raise IndexError(f"index {idx} out of range for n = {n}")
    H = jet.hessian
    return float((H[i, l] * H[j, k] - H[i, k] * H[j, l]) / jet.w ** _w_power(convention))


def _minor_max(hessians: np.ndarray) -> np.ndarray:
    """max over i<j, k<l of |H_il H_jk - H_ik H_jl| for a stack ``(m, n, n)``."""
    n = hessians.shape[-1]
    out = np.zeros(hessians.shape[:-2])
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        for k, l in pairs:
            minor = hessians[..., i, l] * hessians[..., j, k] - hessians[..., i, k] * hessians[..., j, l]
            np.maximum(out, np.abs(minor), out=out)
    return out


def riemann_max_abs(jet: Jet2, convention: str = "paper") -> float:
    """Largest curvature component in absolute value; zero iff the graph is flat there."""
    if jet.n < 2:
        raise InputError("curvature tensor needs at least 2 variables")
    return float(_minor_max(jet.hessian[None])[0] / jet.w ** _w_power(convention))


def flat_threshold(jet: Jet2, tol: float = FLAT_TOL, convention: str = "paper") -> float:
    """Tolerance below which :func:`riemann_max_abs` counts as zero.

    Relative to the Hessian scale, since minors grow quadratically with it.
    """
    hmax = float(np.max(np.abs(jet.hessian)))
    return tol * (1.0 + hmax ** 2) / jet.w ** _w_power(convention)


def is_flat_point(jet: Jet2, tol: float = FLAT_TOL) -> bool:
    return riemann_max_abs(jet) <= flat_threshold(jet, tol)


def monge_ampere_residual(jet: Jet2) -> float:
    """Raw ``f_xx f_yy - f_xy**2`` for a function of two variables."""
    if jet.n != 2:
        raise InputError(f"Monge-Ampere residual needs exactly 2 variables, got {jet.n}")
    H = jet.hessian
    return float(H[0, 0] * H[1, 1] - H[0, 1] ** 2)


def curvature_sample(jet: Jet2, convention: str = "paper") -> CurvatureSample:
    return CurvatureSample(
        point=jet.point,
        K=gk_curvature(jet),
        w=jet.w,
        hessian_det=hessian_det(jet),
        riemann_max_abs=riemann_max_abs(jet, convention),
        monge_ampere_residual=monge_ampere_residual(jet) if jet.n == 2 else None,
    )


# ---------------------------------------------------------------------------
# Grid sweeps

@dataclass(frozen=True, eq=False)
class CurvatureSweep:
    """Per-point curvature data over a sample set (all arrays indexed by point)."""

    points: np.ndarray
    values: np.ndarray
    K: np.ndarray
    w: np.ndarray
    hessian_det: np.ndarray
    hessian_max: np.ndarray
    riemann_max_abs: np.ndarray
    flat_threshold: np.ndarray
    gk_relative: np.ndarray
    monge_ampere_residual: Optional[np.ndarray]
    convention: str
    tol_flat: float
    tol_gk: float

    @property
    def flat_flags(self) -> np.ndarray:
        return self.riemann_max_abs <= self.flat_threshold

    @property
    def flat_ratio(self) -> np.ndarray:
        """``riemann_max_abs / flat_threshold``; <= 1 means flat-flagged.

        With a zero tolerance an exact zero counts as ratio 0.
        """
        num, den = self.riemann_max_abs, self.flat_threshold
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(num == 0, 0.0, num / den)

    @property
    def gk_zero_flags(self) -> np.ndarray:
        return self.gk_relative <= self.tol_gk

    def __len__(self):
        return self.points.shape[0]


def curvature_sweep(expr: Expression, points, convention: str = "paper",
                    tol_flat: float = FLAT_TOL, tol_gk: float = GK_TOL) -> CurvatureSweep:
    """Evaluate every curvature invariant of ``z = expr`` at each row of ``points``."""
    n = expr.arity
    if n < 2:
        raise InputError("curvature sweeps need at least 2 variables")
    p = _w_power(convention)
    pts = np.asarray(points, dtype=float)

    def work(chunk):
        jets = jet2_batch(expr, chunk)
        H = jets.hessians
        w = jets.w
        det = np.linalg.det(H)
        hmax = np.max(np.abs(H), axis=(1, 2))
        out = {
            "values": jets.values,
            "K": det / w ** (n + 2),
            "w": w,
            "det": det,
            "hmax": hmax,
            "rmax": _minor_max(H) / w ** p,
            "thr": tol_flat * (1.0 + hmax ** 2) / w ** p,
            "gkrel": np.abs(det) / (1.0 + hmax) ** n,
        }
        if n == 2:
            out["ma"] = H[:, 0, 0] * H[:, 1, 1] - H[:, 0, 1] ** 2
        return out

    r = map_chunks(work, pts)
    return CurvatureSweep(
        points=pts, values=r["values"], K=r["K"], w=r["w"], hessian_det=r["det"],
        hessian_max=r["hmax"], riemann_max_abs=r["rmax"], flat_threshold=r["thr"],
        gk_relative=r["gkrel"], monge_ampere_residual=r.get("ma"),
        convention=convention, tol_flat=tol_flat, tol_gk=tol_gk,
    )


# ---------------------------------------------------------------------------
# Parametric surfaces

def _as_hd(v) -> HyperDual:
    return v if isinstance(v, HyperDual) else HyperDual(v, 0.0, 0.0, 0.0)


def surface_partials(param: Callable, t: float, s: float):
    """First and second partials of a parametrisation ``param(t, s) -> (x, y, z)``.

    ``param`` must accept hyper-dual arguments.  Returns
    ``(P_t, P_s, P_tt, P_ts, P_ss)`` as 3-vectors.
    """
    def run(T, S):
        return [_as_hd(c) for c in param(T, S)]

    tt = run(HyperDual(t, 1.0, 1.0, 0.0), HyperDual(s))
    ts = run(HyperDual(t, 1.0, 0.0, 0.0), HyperDual(s, 0.0, 1.0, 0.0))
    ss = run(HyperDual(t), HyperDual(s, 1.0, 1.0, 0.0))

    def vec(parts, attr):
        return np.array([float(real_part(getattr(c, attr))) for c in parts])

    return vec(tt, "b"), vec(ts, "c"), vec(tt, "d"), vec(ts, "d"), vec(ss, "d")


def gauss_curvature_parametric(param: Callable, t: float, s: float) -> float:
    """Gaussian curvature ``(LN - M^2) / (EG - F^2)`` of a parametrised surface."""
    Pt, Ps, Ptt, Pts, Pss = surface_partials(param, t, s)
    E, F, G = Pt @ Pt, Pt @ Ps, Ps @ Ps
    metric = E * G - F * F
    if not metric > METRIC_TOL:
        raise DegenerateError(f"degenerate first fundamental form at (t, s) = ({t!r}, {s!r}): EG - F^2 = {metric:.3g}")
    normal = np.cross(Pt, Ps)
    normal /= np.linalg.norm(normal)
    L, M, N = Ptt @ normal, Pts @ normal, Pss @ normal
    K = (L * N - M * M) / metric
    if not math.isfinite(K):
        raise DomainError(f"non-finite curvature at (t, s) = ({t!r}, {s!r})")
    return float(K)


@dataclass(frozen=True)
class UshakovSurface:
    """Developable graph generated by two functions of one variable ``t``::

        x = g(t) - s h'(t),   y = s,   z = t g(t) - int_0^t g + s (h(t) - t h'(t))

    Regular wherever ``g'(t) != 0`` and ``g'(t) != s h''(t)``.
    """

    g: Expression
    h: Expression
    t_range: tuple[float, float] = (0.5, 1.5)
    s_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        for name in ("g", "h"):
            if getattr(self, name).arity != 1:
                raise InputError(f"{name} must be a function of one variable")
        for name in ("t_range", "s_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InputError(f"{name} must satisfy min < max, got {(lo, hi)}")
            object.__setattr__(self, name, (lo, hi))

    def integral_g(self, t: float) -> float:
        return _integral(self.g, float(t))

    def profile(self, t: float):
        """``(g, g', g'', int_0^t g, h, h', h'', h''')`` at ``t``; requires ``g'(t) != 0``."""
        return _profile(self, float(t))

    def position(self, T, S):
        """Surface point for float or hyper-dual ``(T, S)``."""
        g0, g1, g2, G, h0, h1, h2, h3 = self.profile(real_part(T))

        def lift(f0, f1, f2):
            return T.chain(f0, f1, f2) if isinstance(T, HyperDual) else f0

        g = lift(g0, g1, g2)
        Gi = lift(G, g0, g1)
        h = lift(h0, h1, h2)
        hp = lift(h1, h2, h3)
        x = g - S * hp
        z = T * g - Gi + S * (h - T * hp)
        return x, S, z

    def check(self, t: float, s: float):
        (t0, t1), (s0, s1) = self.t_range, self.s_range
        slack = 1e-12
        if not (t0 - slack <= t <= t1 + slack and s0 - slack <= s <= s1 + slack):
            raise InputError(f"(t, s) = ({t!r}, {s!r}) outside t in {self.t_range}, s in {self.s_range}")


@functools.lru_cache(maxsize=4096)
def _integral(g: Expression, t: float) -> float:
    def integrand(r):
        return evaluate(g, [r])

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(integrand, 0.0, t, epsabs=1e-10, epsrel=1e-10, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"integral of g over [0, {t!r}] did not converge: {exc}") from None
        except DomainError as exc:
            raise QuadratureError(f"g is undefined on [0, {t!r}]: {exc}") from None
    if not math.isfinite(value) or err > 1e-10 * max(1.0, abs(value)):
        raise QuadratureError(f"integral of g over [0, {t!r}] has error estimate {err:.3g}")
    return value


@functools.lru_cache(maxsize=4096)
def _profile(surface: UshakovSurface, t: float):
    g0, g1, g2, _ = univariate_derivatives(surface.g, t)
    if abs(g1) <= 1e-12:
        raise DegenerateError(f"g'(t) vanishes at t = {t!r}; the construction requires g' != 0")
    h0, h1, h2, h3 = univariate_derivatives(surface.h, t)
    return g0, g1, g2, _integral(surface.g, t), h0, h1, h2, h3


def ushakov_point(surface: UshakovSurface, t: float, s: float) -> np.ndarray:
    """``(x, y, z)`` of the developable surface at parameters ``(t, s)``."""
    surface.check(t, s)
    x, y, z = surface.position(float(t), float(s))
    return np.array([x, y, z], dtype=float)


def parametric_gauss_curvature(surface: UshakovSurface, t: float, s: float) -> float:
    surface.check(t, s)
    return gauss_curvature_parametric(surface.position, float(t), float(s))


@dataclass(frozen=True, eq=False)
class UshakovMesh:
    """Rows ``t, s, x, y, z, K``; ``K`` is ``nan`` where the parametrisation is singular."""

    t: np.ndarray
    s: np.ndarray
    xyz: np.ndarray
    K: np.ndarray

    @property
    def singular(self) -> np.ndarray:
        return np.isnan(self.K)

    @property
    def max_abs_K(self) -> float:
        regular = self.K[~self.singular]
        return float(np.max(np.abs(regular))) if regular.size else float("nan")


def ushakov_mesh(surface: UshakovSurface, resolution: int = 31) -> UshakovMesh:
    """Sample position and curvature on a ``resolution x resolution`` grid.

    Points on the edge of regression (degenerate metric) are kept with
    ``K = nan``; a vanishing ``g'`` anywhere is an error.
    """
    if resolution < 2:
        raise InputError("resolution must be >= 2")
    ts = np.linspace(*surface.t_range, resolution)
    ss = np.linspace(*surface.s_range, resolution)
    T, S = np.meshgrid(ts, ss, indexing="ij")
    T, S = T.ravel(), S.ravel()
    xyz = np.empty((T.size, 3))
    K = np.empty(T.size)
    for k, (t, s) in enumerate(zip(T, S)):
        xyz[k] = ushakov_point(surface, t, s)
        try:
            K[k] = parametric_gauss_curvature(surface, t, s)
        except DegenerateError:
            K[k] = np.nan
    return UshakovMesh(T, S, xyz, K)
