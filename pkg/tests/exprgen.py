"""Random expression generators shared by the tests."""
import numpy as np

from hypersurf.expr import Binary, Const, Expression, Unary, Var, evaluate_many


def positive_node(rng, n, depth):
    """A random AST that is positive and smooth on [0.5, 2]^n."""
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.7:
            return Var(int(rng.integers(n)))
        return Const(round(float(rng.uniform(0.5, 2.0)), 3))
    kind = rng.choice(["+", "*", "/", "^", "sqrt", "exp", "log", "sub", "abs"])
    a = positive_node(rng, n, depth - 1)
    if kind in ("+", "*", "/"):
        return Binary(kind, a, positive_node(rng, n, depth - 1))
    if kind == "^":
        return Binary("^", a, Const(float(rng.choice([2.0, 3.0, 0.5, 1.5, -1.0, 0.7]))))
    if kind == "sqrt":
        return Unary("sqrt", a)
    if kind == "exp":
        return Unary("exp", Binary("/", a, Const(4.0)))
    if kind == "log":
        return Unary("log", Binary("+", Const(1.0), a))
    if kind == "sub":
        # a * (2 - 1/(1 + b)) stays positive and exercises '-' and division
        b = positive_node(rng, n, depth - 1)
        return Binary("*", a, Binary("-", Const(2.0), Binary("/", Const(1.0), Binary("+", Const(1.0), b))))
    return Unary("abs", Unary("neg", a))


def random_expressions(count, seed=0, max_value=100.0, depth=3):
    """``count`` random expressions with |f| <= max_value on a probe set in [0.5, 2]^n."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, 5))
        names = [f"x{i + 1}" for i in range(n)]
        expr = Expression(positive_node(rng, n, depth), names)
        probe = rng.uniform(0.5, 2.0, size=(16, n))
        values = evaluate_many(expr, probe)
        if np.all(np.abs(values) <= max_value) and any(isinstance(v, Var) for v in _nodes(expr.root)):
            out.append(expr)
    return out


def _nodes(node):
    from hypersurf.expr import walk
    return list(walk(node))


def random_multinomial(rng, n, r, signed=False):
    """Coefficients for (c.x)^r; c.x > 0 on [0.5, 2]^n unless ``signed``."""
    while True:
        c = rng.uniform(-3.0, 3.0, size=n)
        if np.max(np.abs(c)) < 0.1:
            continue
        worst = np.sum(np.where(c > 0, 0.5 * c, 2.0 * c))
        if signed or worst > 0.05:
            return c
