"""Named production-function families as expressions with known degree."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import ConstraintError, InputError
from .expr import Binary, Const, Expression, Node, Unary, Var, _check_variable_names

FAMILIES = ("cobb-douglas", "generalized-ces", "multinomial", "linear", "counterexample-r1")
ALIASES = {
    "ces": "generalized-ces",
    "acms": "generalized-ces",
    "armington": "generalized-ces",
    "cd": "cobb-douglas",
    "binomial": "multinomial",
    "counterexample": "counterexample-r1",
}

_CATALOG = (
    {
        "family": "cobb-douglas",
        "formula": "A * prod_i x_i^c_i",
        "parameters": {"A": "positive real", "c": "list of n real exponents"},
        "constraints": ["A > 0"],
        "degree": "sum(c)",
        "citation": "Cobb, C.W. and Douglas, P.H. (1928), A theory of production, American Economic Review 18",
    },
    {
        "family": "generalized-ces",
        "formula": "A * (sum_i c_i x_i^rho)^(gamma/rho)",
        "parameters": {"A": "positive real", "c": "list of n positive reals", "rho": "real", "gamma": "positive real"},
        "constraints": ["A > 0", "rho < 1", "rho != 0", "gamma > 0", "c_i > 0"],
        "degree": "gamma",
        "citation": "Arrow, Chenery, Minhas and Solow (1961); Uzawa (1962); McFadden (1963)",
    },
    {
        "family": "multinomial",
        "formula": "A * (sum_i c_i x_i)^gamma",
        "parameters": {"A": "positive real", "c": "list of n reals, not all zero", "gamma": "positive real"},
        "constraints": ["A > 0", "gamma > 0", "c != 0"],
        "degree": "gamma",
        "citation": "CES limit rho -> 1; called binomial when n = 2",
    },
    {
        "family": "linear",
        "formula": "A * sum_i c_i x_i",
        "parameters": {"A": "positive real", "c": "list of n reals, not all zero"},
        "constraints": ["A > 0", "c != 0"],
        "degree": "1",
        "citation": "perfect substitutes production function",
    },
    {
        "family": "counterexample-r1",
        "formula": "(x + y + sqrt(y*z))^r",
        "parameters": {"r": "real > 1"},
        "constraints": ["n = 3", "r > 1"],
        "degree": "r",
        "citation": "homogeneous function of three inputs with vanishing Gauss-Kronecker curvature "
                    "and a non-flat hypersurface",
    },
)

# grids for the counterexample stay this far from the coordinate planes (sqrt(yz) is not C^2 there)
COUNTEREXAMPLE_DELTA = 1e-6


@dataclass(frozen=True)
class FamilySpec:
    family: str
    A: float = 1.0
    coefficients: tuple[float, ...] = ()
    rho: Optional[float] = None
    gamma: Optional[float] = None
    r: Optional[float] = None

    def __post_init__(self):
        tag = ALIASES.get(self.family, self.family)
        if tag not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        object.__setattr__(self, "family", tag)
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))


@dataclass(frozen=True)
class BuiltFamily:
    expression: Expression
    degree: float
    family: str
    metadata: dict = field(default_factory=dict, hash=False, compare=False)


def list_families() -> list[dict]:
    """Catalog of families with parameter schemas, constraints and references."""
    return [dict(entry, parameters=dict(entry["parameters"]), constraints=list(entry["constraints"]))
            for entry in _CATALOG]


def default_variables(n: int) -> tuple[str, ...]:
    return ("x", "y", "z")[:n] if n <= 3 else tuple(f"x{i + 1}" for i in range(n))


def _const(v: float) -> Node:
    # negative constants as neg(c) so printing and re-parsing is an identity
    return Unary("neg", Const(-v)) if v < 0 else Const(float(v))


def _sum(terms: Sequence[Node]) -> Node:
    node = terms[0]
    for t in terms[1:]:
        node = Binary("+", node, t)
    return node


def _product(terms: Sequence[Node]) -> Node:
    node = terms[0]
    for t in terms[1:]:
        node = Binary("*", node, t)
    return node


def _scaled(A: float, node: Node) -> Node:
    return node if A == 1.0 else Binary("*", _const(A), node)


def _require(ok: bool, message: str):
    if not ok:
        raise ConstraintError(message)


def _finite(name, v):
    if v is None:
        raise ConstraintError(f"parameter {name} is required")
    if not math.isfinite(v):
        raise ConstraintError(f"parameter {name} must be finite")
    return float(v)


def build(spec: FamilySpec, arity: int, variables: Optional[Sequence[str]] = None) -> BuiltFamily:
    """Build the expression of ``spec`` in ``arity`` variables with its degree.

    >>> b = build(FamilySpec("multinomial", coefficients=(2, 3), gamma=1.5), 2)
    >>> str(b.expression), b.degree
    ('(2.0 * x + 3.0 * y) ^ 1.5', 1.5)
    """
    n = int(arity)
    _require(n >= 1, "arity must be at least 1")
    names = _check_variable_names(variables if variables is not None else default_variables(n))
    _require(len(names) == n, f"{len(names)} variable names given for arity {n}")
    fam = spec.family
    A = _finite("A", spec.A)
    meta: dict = {"family": fam}
    xs = [Var(i) for i in range(n)]

    if fam == "counterexample-r1":
        _require(n == 3, f"counterexample needs exactly 3 variables, got {n}")
        r = _finite("r", spec.r)
        _require(r > 1, f"r > 1 required, got r = {r}")
        x, y, z = xs
        base = Binary("+", Binary("+", x, y), Unary("sqrt", Binary("*", y, z)))
        meta["domain_delta"] = COUNTEREXAMPLE_DELTA
        return BuiltFamily(Expression(Binary("^", base, _const(r)), names), r, fam, meta)

    _require(A > 0, f"A > 0 required, got A = {A}")
    c = spec.coefficients
    _require(len(c) == n, f"{fam} needs {n} coefficients, got {len(c)}")
    for ci in c:
        _finite("c", ci)

    if fam == "cobb-douglas":
        node = _scaled(A, _product([Binary("^", xi, _const(ci)) for xi, ci in zip(xs, c)]))
        degree = math.fsum(c)
        meta["constant_returns"] = abs(degree - 1.0) <= 1e-12
        return BuiltFamily(Expression(node, names), degree, fam, meta)

    if fam == "generalized-ces":
        rho = _finite("rho", spec.rho)
        gamma = _finite("gamma", spec.gamma)
        _require(rho < 1, f"ρ < 1 required, got ρ = {rho}")
        _require(rho != 0, "ρ ≠ 0 required")
        _require(gamma > 0, f"γ > 0 required, got γ = {gamma}")
        _require(all(ci > 0 for ci in c), "c_i > 0 required for every i")
        inner = _sum([Binary("*", _const(ci), Binary("^", xi, _const(rho))) for xi, ci in zip(xs, c)])
        node = _scaled(A, Binary("^", inner, _const(gamma / rho)))
        meta["constant_returns"] = gamma == 1.0
        return BuiltFamily(Expression(node, names), gamma, fam, meta)

    _require(any(ci != 0 for ci in c), "at least one nonzero coefficient required")
    linear = _sum([Binary("*", _const(ci), xi) for xi, ci in zip(xs, c)])
    if fam == "linear":
        return BuiltFamily(Expression(_scaled(A, linear), names), 1.0, fam, meta | {"constant_returns": True})

    gamma = _finite("gamma", spec.gamma)
    _require(gamma > 0, f"γ > 0 required, got γ = {gamma}")
    meta["binomial"] = n == 2
    meta["constant_returns"] = gamma == 1.0
    node = _scaled(A, Binary("^", linear, _const(gamma)))
    return BuiltFamily(Expression(node, names), gamma, fam, meta)
