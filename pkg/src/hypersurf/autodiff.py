"""Exact first and second derivatives through hyper-dual arithmetic.

A hyper-dual number ``a + b e1 + c e2 + d e1 e2`` with ``e1**2 = e2**2 = 0``
carries, after pushing it through a function ``f``, the values
``f(a)``, ``f'(a) b``, ``f'(a) c`` and ``f'(a) d + f''(a) b c``.  Seeding
variable ``i`` with ``b = 1`` and variable ``j`` with ``c = 1`` therefore
yields ``d = d2f / dx_i dx_j`` without truncation error.

Components may be floats, numpy arrays (one hyper-dual per sample point)
or hyper-dual numbers themselves.  The nested form gives third and fourth
derivatives of univariate functions, which the developable-surface code
needs for ``h'''``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError, NonSmoothPointError
from .expr import Expression, _check_point, evaluate, evaluate_node


def real_part(x):
    while isinstance(x, HyperDual):
        x = x.a
    return x


def _nonzero(x):
    """Elementwise 'any component differs from zero'."""
    if isinstance(x, HyperDual):
        return _nonzero(x.a) | _nonzero(x.b) | _nonzero(x.c) | _nonzero(x.d)
    return np.asarray(x) != 0


def _perturbed(x):
    """Elementwise 'carries a nonzero infinitesimal part at any nesting level'."""
    if not isinstance(x, HyperDual):
        return np.zeros(np.shape(x), dtype=bool)
    return _perturbed(x.a) | _nonzero(x.b) | _nonzero(x.c) | _nonzero(x.d)


def _fail(message, mask):
    mask = np.asarray(mask)
    if mask.ndim:
        message = f"{message} (at sample {int(np.flatnonzero(mask)[0])})"
    raise DomainError(message)


# dispatchers: float/array -> numpy, HyperDual -> method
def _exp(v):
    return v.exp() if isinstance(v, HyperDual) else np.exp(v)


def _log(v):
    return v.log() if isinstance(v, HyperDual) else np.log(v)


def _sqrt(v):
    return v.sqrt() if isinstance(v, HyperDual) else np.sqrt(v)


def _sin(v):
    return v.sin() if isinstance(v, HyperDual) else np.sin(v)


def _cos(v):
    return v.cos() if isinstance(v, HyperDual) else np.cos(v)


class HyperDual:
    """Hyper-dual number ``a + b*e1 + c*e2 + d*e1*e2``."""

    __slots__ = ("a", "b", "c", "d")
    # make numpy arrays and scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, a, b=0.0, c=0.0, d=0.0):
        self.a, self.b, self.c, self.d = a, b, c, d

    def __repr__(self):
        return f"HyperDual({self.a!r}, {self.b!r}, {self.c!r}, {self.d!r})"

    def components(self):
        return self.a, self.b, self.c, self.d

    def is_constant(self) -> bool:
        return not np.any(_perturbed(self))

    def chain(self, f0, f1, f2) -> "HyperDual":
        """Apply a scalar function given its value and first two derivatives at ``a``."""
        return HyperDual(f0, f1 * self.b, f1 * self.c, f1 * self.d + f2 * (self.b * self.c))

    # arithmetic ----------------------------------------------------------
    def __neg__(self):
        return HyperDual(-self.a, -self.b, -self.c, -self.d)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.a + other.a, self.b + other.b, self.c + other.c, self.d + other.d)
        return HyperDual(self.a + other, self.b, self.c, self.d)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d)
        return HyperDual(self.a - other, self.b, self.c, self.d)

    def __rsub__(self, other):
        return HyperDual(other - self.a, -self.b, -self.c, -self.d)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            a1, b1, c1, d1 = self.components()
            a2, b2, c2, d2 = other.components()
            return HyperDual(
                a1 * a2,
                a1 * b2 + b1 * a2,
                a1 * c2 + c1 * a2,
                a1 * d2 + b1 * c2 + c1 * b2 + d1 * a2,
            )
        return HyperDual(self.a * other, self.b * other, self.c * other, self.d * other)

    __rmul__ = __mul__

    def reciprocal(self):
        zero = np.asarray(real_part(self.a)) == 0
        if np.any(zero):
            _fail("division by zero", zero)
        inv = 1.0 / self.a
        inv2 = inv * inv
        return self.chain(inv, -inv2, 2.0 * inv2 * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        zero = np.asarray(real_part(other)) == 0
        if np.any(zero):
            _fail("division by zero", zero)
        return HyperDual(self.a / other, self.b / other, self.c / other, self.d / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def _power(self, p):
        """``self ** p`` for a real (non-hyper-dual) exponent ``p``."""
        base = np.asarray(real_part(self.a), dtype=float)
        p_arr = np.asarray(p, dtype=float)
        integral = np.floor(p_arr) == p_arr
        bad = (~integral & (base <= 0)) | (integral & (base == 0) & (p_arr < 0))
        if np.any(bad):
            _fail("power outside domain (non-integer exponent needs a positive base; 0 to a negative power)",
                  np.broadcast_to(bad, np.broadcast(base, p_arr).shape))
        if p_arr.ndim == 0:
            p = float(p_arr)
            if p == 0.0:
                return HyperDual(self.a * 0.0 + 1.0, self.b * 0.0, self.c * 0.0, self.d * 0.0)
            if p == 1.0:
                return self
            if p == 2.0:
                return self * self
            f2 = p * (p - 1.0) * _pow(self.a, p - 2.0)
            return self.chain(_pow(self.a, p), p * _pow(self.a, p - 1.0), f2)
        if isinstance(self.a, HyperDual):
            raise InputError("array exponents are not supported on nested hyper-dual numbers")
        a = np.asarray(self.a, dtype=float)
        with np.errstate(all="ignore"):
            f0 = np.power(a, p_arr)
            f1 = np.where(p_arr == 0, 0.0, p_arr * np.power(a, p_arr - 1.0))
            f2 = np.where((p_arr == 0) | (p_arr == 1), 0.0,
                          p_arr * (p_arr - 1.0) * np.power(a, p_arr - 2.0))
        return self.chain(f0, f1, f2)

    def __pow__(self, other):
        if isinstance(other, HyperDual):
            if other.is_constant():
                return self._power(real_part(other))
            nonpos = np.asarray(real_part(self.a)) <= 0
            if np.any(nonpos):
                _fail("variable exponent needs a positive base", nonpos)
            return (other * self.log()).exp()
        return self._power(other)

    def __rpow__(self, other):
        if self.is_constant():
            base = np.asarray(other, dtype=float)
            return HyperDual(_real_pow_or_fail(base, self.a), self.b * 0.0, self.c * 0.0, self.d * 0.0)
        nonpos = np.asarray(other) <= 0
        if np.any(nonpos):
            _fail("variable exponent needs a positive base", nonpos)
        return (self * np.log(other)).exp()

    def __abs__(self):
        re = np.asarray(real_part(self.a))
        kink = (re == 0) & _perturbed(self)
        if np.any(kink):
            raise NonSmoothPointError("abs is not differentiable at 0"
                                      + (f" (at sample {int(np.flatnonzero(kink)[0])})" if kink.ndim else ""))
        return self * np.sign(re)

    # elementary functions ------------------------------------------------
    def exp(self):
        e = _exp(self.a)
        out = self.chain(e, e, e)
        _check_finite(out, "exp")
        return out

    def log(self):
        nonpos = np.asarray(real_part(self.a)) <= 0
        if np.any(nonpos):
            _fail("log of non-positive argument", nonpos)
        inv = 1.0 / self.a
        return self.chain(_log(self.a), inv, -(inv * inv))

    def sqrt(self):
        re = np.asarray(real_part(self.a))
        neg = re < 0
        if np.any(neg):
            _fail("sqrt of negative argument", neg)
        zero = re == 0
        if np.any(zero & _perturbed(self)):
            _fail("non-finite derivative: sqrt at 0", zero & _perturbed(self))
        if not np.any(zero):
            r = _sqrt(self.a)
            return self.chain(r, 0.5 / r, -0.25 / (r * self.a))
        # unperturbed zeros: derivative parts vanish there, avoid 0 * inf
        a = np.where(zero, 1.0, self.a)
        r = np.sqrt(a)
        return self.chain(np.where(zero, 0.0, r), np.where(zero, 0.0, 0.5 / r),
                          np.where(zero, 0.0, -0.25 / (r * a)))

    def sin(self):
        s, c = _sin(self.a), _cos(self.a)
        return self.chain(s, c, -s)

    def cos(self):
        s, c = _sin(self.a), _cos(self.a)
        return self.chain(c, -s, -c)


def _pow(v, p):
    return v._power(p) if isinstance(v, HyperDual) else np.power(v, p)


def _real_pow_or_fail(base, p):
    from .expr import real_pow

    return real_pow(base, real_part(p))


def _check_finite(x, what):
    for comp in (x.components() if isinstance(x, HyperDual) else (x,)):
        if isinstance(comp, HyperDual):
            _check_finite(comp, what)
        elif not np.all(np.isfinite(comp)):
            _fail(f"non-finite result in {what}", ~np.isfinite(comp))


# ---------------------------------------------------------------------------
# Jets

@dataclass(frozen=True, eq=False)
class Jet2:
    """Value, gradient and Hessian of ``f`` at ``point``."""

    point: np.ndarray
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    w: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "w", float(math.sqrt(1.0 + float(np.dot(self.gradient, self.gradient)))))

    @property
    def n(self) -> int:
        return len(self.point)


@dataclass(frozen=True, eq=False)
class JetBatch:
    """Jets at ``m`` points stored as arrays: values ``(m,)``, gradients ``(m, n)``,
    Hessians ``(m, n, n)``."""

    points: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    hessians: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return np.sqrt(1.0 + np.sum(self.gradients ** 2, axis=1))

    def __len__(self):
        return self.points.shape[0]

    def __getitem__(self, k) -> Jet2:
        return Jet2(self.points[k], float(self.values[k]), self.gradients[k], self.hessians[k])


def jet2_batch(expr: Expression, points) -> JetBatch:
    """Jets of ``expr`` at every row of ``points`` (shape ``(m, n)``).

    Runs one hyper-dual pass per pair ``i <= j``; the pass seeded
    ``(e_i, e_i)`` also delivers the gradient entry ``i``.  Each Hessian
    entry is computed once and mirrored, so the result is exactly symmetric.
    """
    n = expr.arity
    if n < 1:
        raise InputError("derivatives need an expression of at least one variable")
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise InputError(f"points must have shape (m, {n}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InputError("point coordinates must be finite")
    m = pts.shape[0]
    zeros = np.zeros(m)
    cols = [pts[:, k] for k in range(n)]
    values = None
    grad = np.empty((m, n))
    hess = np.empty((m, n, n))
    for i in range(n):
        for j in range(i, n):
            env = []
            for k in range(n):
                env.append(HyperDual(cols[k], 1.0 if k == i else zeros, 1.0 if k == j else zeros, zeros))
            out = evaluate_node(expr.root, env)
            if not isinstance(out, HyperDual):
                out = HyperDual(out, 0.0, 0.0, 0.0)
            a, b, _, d = (np.broadcast_to(np.asarray(v, dtype=float), (m,)) for v in out.components())
            if values is None:
                values = np.array(a)
            if i == j:
                grad[:, i] = b
            hess[:, i, j] = d
            hess[:, j, i] = d
    for name, arr in (("value", values), ("gradient", grad), ("Hessian", hess)):
        ok = np.isfinite(arr).reshape(m, -1).all(axis=1)
        if not ok.all():
            raise DomainError(f"non-finite {name} (at sample {int(np.flatnonzero(~ok)[0])})")
    return JetBatch(pts, values, grad, hess)


def jet2(expr: Expression, point: Sequence[float]) -> Jet2:
    """Exact value, gradient and Hessian at a single point.

    >>> from hypersurf.expr import parse
    >>> jet2(parse("x*y", ["x", "y"]), [3, 5]).hessian.tolist()
    [[0.0, 1.0], [1.0, 0.0]]
    """
    p = _check_point(expr, point)
    return jet2_batch(expr, p[None, :])[0]


def fd_jet2(expr: Expression, point: Sequence[float], step: float = 1e-4) -> Jet2:
    """Central finite-difference jet; truncation error is O(step**2).

    Used as an independent oracle for :func:`jet2`.  The point must lie
    inside the domain by at least ``2*step`` in each coordinate.
    """
    if not step > 0 or not math.isfinite(step):
        raise InputError(f"step must be positive and finite, got {step!r}")
    x = _check_point(expr, point)
    n = len(x)

    def f(y):
        return evaluate(expr, y)

    f0 = f(x)
    grad = np.empty(n)
    hess = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        fp, fm = f(x + ei), f(x - ei)
        grad[i] = (fp - fm) / (2 * step)
        hess[i, i] = (fp - 2 * f0 + fm) / step ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = step
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * step ** 2)
            hess[i, j] = hess[j, i] = v
    return Jet2(x, f0, grad, hess)


def univariate_derivatives(expr: Expression, t: float) -> tuple[float, float, float, float]:
    """``(f, f', f'', f''')`` of a one-variable expression at ``t``.

    Uses a hyper-dual number whose components are themselves hyper-dual,
    so the third derivative is exact as well.
    """
    if expr.arity != 1:
        raise InputError(f"expected a one-variable expression, arity is {expr.arity}")
    inner = HyperDual(float(t), 1.0, 0.0, 0.0)
    x = HyperDual(inner, 1.0, 1.0, 0.0)
    out = evaluate_node(expr.root, [x])
    if not isinstance(out, HyperDual):
        return float(out), 0.0, 0.0, 0.0
    a, b, _, d = out.components()
    f0 = float(real_part(a))
    f1 = float(real_part(b))
    f2 = float(real_part(d))
    f3 = float(d.b) if isinstance(d, HyperDual) else 0.0
    res = (f0, f1, f2, f3)
    if not all(math.isfinite(v) for v in res):
        raise DomainError(f"non-finite derivative at t = {t!r}")
    return res
