"""Expression language for scalar functions of n variables.

Grammar (see ``docs/grammar.md``)::

    expr   = term { ("+" | "-") term } ;
    term   = unary { ("*" | "/") unary } ;
    unary  = "-" unary | power ;
    power  = atom [ "^" unary ] ;
    atom   = number | name | func "(" expr ")" | "(" expr ")" ;
    func   = "sqrt" | "exp" | "log" | "abs" ;

``^`` binds tightest and associates to the right, so ``-x^2`` is ``-(x^2)``
and ``2^3^2`` is ``2^9``.  ``pi`` and ``e`` are predefined constants.

Evaluation is generic over the scalar type: plain floats, numpy arrays
(one entry per sample point) or hyper-dual numbers from
:mod:`hypersurf.autodiff`.  Real arithmetic is checked; any operation
outside its domain raises :class:`~hypersurf.errors.DomainError` instead of
producing ``nan`` or ``inf``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DomainError, InputError, ParseError

FUNCTIONS = ("sqrt", "exp", "log", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}
BINARY_OPS = ("+", "-", "*", "/", "^")
UNARY_OPS = ("neg",) + FUNCTIONS


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise InputError(f"constant must be finite, got {self.value!r}")


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Const, Var, Unary, Binary]


@dataclass(frozen=True)
class Expression:
    """An AST together with its ordered variable names."""

    root: Node
    variables: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        for node in walk(self.root):
            if isinstance(node, Var) and not 0 <= node.index < len(self.variables):
                raise InputError(
                    f"variable index {node.index} out of range for arity {len(self.variables)}"
                )

    @property
    def arity(self) -> int:
        return len(self.variables)

    def __str__(self):
        return to_source(self)


def walk(node: Node):
    """Yield every node of the tree, parents before children."""
    stack = [node]
    while stack:
        item = stack.pop()
        yield item
        if isinstance(item, Unary):
            stack.append(item.arg)
        elif isinstance(item, Binary):
            stack.extend((item.right, item.left))


# ---------------------------------------------------------------------------
# Tokenizer and recursive-descent parser

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op | end
    text: str
    pos: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.lastgroup is None:
            bad = pos + len(source[pos:]) - len(source[pos:].lstrip())
            raise ParseError(f"unexpected character {source[bad]!r}", bad, source)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", len(source)))
    return tokens


def _check_variable_names(variables: Sequence[str]) -> tuple[str, ...]:
    names = tuple(variables)
    for name in names:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", name):
            raise InputError(f"invalid variable name {name!r}")
        if name in FUNCTIONS or name in CONSTANTS:
            raise InputError(f"variable name {name!r} is reserved")
    if len(set(names)) != len(names):
        raise InputError(f"duplicate variable names in {list(names)}")
    return names


class _Parser:
    def __init__(self, source: str, variables: tuple[str, ...]):
        self.source = source
        self.tokens = _tokenize(source)
        self.index = 0
        self.lookup = {name: i for i, name in enumerate(variables)}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.index]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.pos, self.source)

    def advance(self) -> _Token:
        tok = self.tok
        self.index += 1
        return tok

    def expect(self, text: str):
        if self.tok.text != text or self.tok.kind != "op":
            found = repr(self.tok.text) if self.tok.kind != "end" else "end of input"
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error(f"numeric literal {tok.text!r} overflows", tok)
            return Const(value)
        if tok.kind == "name":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(tok.text, arg)
            if tok.text in self.lookup:
                return Var(self.lookup[tok.text])
            if tok.text in CONSTANTS:
                return Const(CONSTANTS[tok.text])
            raise self.error(f"unknown identifier {tok.text!r}", tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected token {tok.text!r}")


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``variables``.

    An empty variable list is accepted and yields a constant expression;
    operations that need a function of n >= 1 variables reject it later.

    >>> parse("(x + 2*y)^3", ["x", "y"]).root
    Binary(op='^', left=Binary(op='+', left=Var(index=0), right=Binary(op='*', left=Const(value=2.0), right=Var(index=1))), right=Const(value=3.0))
    """
    if not isinstance(source, str) or not source.strip():
        raise ParseError("empty expression", 0, source if isinstance(source, str) else None)
    names = _check_variable_names(variables)
    return Expression(_Parser(source, names).parse(), names)


# ---------------------------------------------------------------------------
# Pretty printer

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def free_identifiers(source: str) -> tuple[str, ...]:
    """Identifiers of ``source`` that are not functions or constants, in order of first use.

    >>> free_identifiers("y * exp(x) + pi * y")
    ('y', 'x')
    """
    seen: dict[str, None] = {}
    for tok in _tokenize(source):
        if tok.kind == "name" and tok.text not in FUNCTIONS and tok.text not in CONSTANTS:
            seen.setdefault(tok.text)
    return tuple(seen)


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return _PREC["neg"]
    if isinstance(node, Const) and node.value < 0:
        return 0
    return _ATOM


def _render(node: Node, names: Sequence[str]) -> str:
    if isinstance(node, Const):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 else text
    if isinstance(node, Var):
        return names[node.index]
    if isinstance(node, Unary):
        if node.op == "neg":
            arg = _render(node.arg, names)
            return "-" + (f"({arg})" if _prec(node.arg) < 3 else arg)
        return f"{node.op}({_render(node.arg, names)})"
    p = _PREC[node.op]
    left = _render(node.left, names)
    right = _render(node.right, names)
    if node.op == "^":
        # base must be an atom; exponent may be a unary chain
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


def to_source(expr: Expression) -> str:
    """Render ``expr`` with minimal parentheses; ``parse`` inverts this exactly."""
    return _render(expr.root, expr.variables)


# ---------------------------------------------------------------------------
# Checked real arithmetic (floats or numpy arrays)

def _is_real(v) -> bool:
    return isinstance(v, (float, int, np.floating, np.integer, np.ndarray))


def _fail(message: str, mask=None):
    if mask is not None and np.ndim(mask) > 0:
        k = int(np.flatnonzero(mask)[0])
        message = f"{message} (at sample {k})"
    raise DomainError(message)


def _finite(v, what: str):
    ok = np.isfinite(v)
    if not np.all(ok):
        _fail(f"non-finite result in {what}", ~ok)
    return v


def real_div(a, b):
    zero = np.asarray(b) == 0
    if np.any(zero):
        _fail("division by zero", zero)
    with np.errstate(all="ignore"):
        return _finite(np.true_divide(a, b), "division")


def real_pow(a, b):
    a_arr, b_arr = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    integral = np.floor(b_arr) == b_arr
    bad = (~integral & (a_arr <= 0)) | (integral & (a_arr == 0) & (b_arr < 0))
    if np.any(bad):
        _fail("power outside domain (non-integer exponent needs a positive base; 0 to a negative power)",
              np.broadcast_to(bad, np.broadcast(a_arr, b_arr).shape))
    with np.errstate(all="ignore"):
        out = np.power(a_arr, b_arr)
    out = _finite(out, "power")
    return out if out.ndim else float(out)


def real_sqrt(a):
    neg = np.asarray(a) < 0
    if np.any(neg):
        _fail("sqrt of negative argument", neg)
    return np.sqrt(a)


def real_log(a):
    bad = np.asarray(a) <= 0
    if np.any(bad):
        _fail("log of non-positive argument", bad)
    return np.log(a)


def real_exp(a):
    with np.errstate(all="ignore"):
        return _finite(np.exp(a), "exp")


_REAL_UNARY = {
    "neg": np.negative,
    "sqrt": real_sqrt,
    "exp": real_exp,
    "log": real_log,
    "abs": np.abs,
}


def _binary(op, a, b):
    if _is_real(a) and _is_real(b):
        if op == "+":
            return _finite(np.add(a, b), "addition")
        if op == "-":
            return _finite(np.subtract(a, b), "subtraction")
        if op == "*":
            return _finite(np.multiply(a, b), "multiplication")
        if op == "/":
            return real_div(a, b)
        return real_pow(a, b)
    # at least one operand is a hyper-dual number; it handles the domain checks
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return a ** b


def _unary(op, v):
    if _is_real(v):
        return _REAL_UNARY[op](v)
    if op == "neg":
        return -v
    if op == "abs":
        return abs(v)
    return getattr(v, op)()


def evaluate_node(node: Node, env: Sequence):
    """Evaluate ``node`` with ``env[i]`` bound to variable ``i``.

    ``env`` entries may be floats, equal-length numpy arrays, or hyper-dual
    numbers; the result has the matching type.
    """
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.index]
    if isinstance(node, Unary):
        return _unary(node.op, evaluate_node(node.arg, env))
    return _binary(node.op, evaluate_node(node.left, env), evaluate_node(node.right, env))


def _check_point(expr: Expression, point) -> np.ndarray:
    p = np.asarray(point, dtype=float)
    if p.ndim != 1 or p.shape[0] != expr.arity:
        raise InputError(f"point has {p.size} coordinates, expression arity is {expr.arity}")
    if not np.all(np.isfinite(p)):
        raise InputError("point coordinates must be finite")
    return p


def evaluate(expr: Expression, point: Sequence[float]) -> float:
    """Evaluate ``expr`` at a single point.

    >>> evaluate(parse("sqrt(x*y)", ["x", "y"]), [4, 9])
    6.0
    """
    p = _check_point(expr, point)
    return float(evaluate_node(expr.root, [float(v) for v in p]))


def evaluate_many(expr: Expression, points) -> np.ndarray:
    """Vectorised evaluation at each row of an ``(m, n)`` array of points."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != expr.arity:
        raise InputError(f"points must have shape (m, {expr.arity}), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise InputError("point coordinates must be finite")
    out = evaluate_node(expr.root, [pts[:, i] for i in range(expr.arity)])
    return np.broadcast_to(np.asarray(out, dtype=float), (pts.shape[0],)).copy()
