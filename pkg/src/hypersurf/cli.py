"""Command-line interface: ``hypersurf {analyze,ushakov,ode-check,families}``.

Exit codes: 0 success, 1 parse or configuration error, 2 math or domain error.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .classify import Tolerances, classify, solve_profile_ode
from .errors import HypersurfError, InputError, MathError
from .expr import Expression, free_identifiers, parse, to_source
from .families import FamilySpec, build, list_families
from .geometry import CONVENTIONS, UshakovSurface, curvature_sweep, ushakov_mesh
from .grids import MAX_POINTS, lattice, quasi_random
from .homogeneity import economic_diagnostics
from .report import (SCHEMA_ID, classification_dict, curvature_dict, dumps, economics_dict, homogeneity_dict,
                     write_graph_csv, write_ode_csv, write_ushakov_csv)

HOMOGENEITY_POINTS = 10


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> tuple[float, float]:
    sep = ":" if ":" in text else ","
    parts = text.split(sep)
    if len(parts) != 2:
        raise InputError(f"range must look like 'min:max', got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise InputError(f"range bounds must be numbers, got {text!r}") from None
    if not lo < hi:
        raise InputError(f"range needs min < max, got {text!r}")
    return lo, hi


def parse_domain(text: Optional[str], n: int) -> list[tuple[float, float]]:
    if text is None:
        return [(0.5, 2.0)] * n
    boxes = [parse_range(part) for part in text.split(",")]
    if len(boxes) == 1:
        boxes = boxes * n
    if len(boxes) != n:
        raise InputError(f"--domain gives {len(boxes)} ranges for {n} variables")
    return boxes


def parse_params(text: Optional[str]) -> dict:
    """``A=1,rho=0.5,gamma=1,c=1,1`` -> ``{"A": 1.0, ..., "c": [1.0, 1.0]}``.

    A bare value after ``key=...`` extends that key's list.
    """
    params: dict = {}
    if not text:
        return params
    key = None
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if "=" in token:
            key, raw = (s.strip() for s in token.split("=", 1))
            if not key:
                raise InputError(f"empty parameter name in {text!r}")
            if key in params:
                raise InputError(f"parameter {key!r} given twice")
            params[key] = []
        elif key is None:
            raise InputError(f"value {token!r} without a parameter name")
        else:
            raw = token
        try:
            params[key].append(float(raw))
        except ValueError:
            raise InputError(f"parameter {key!r} has non-numeric value {raw!r}") from None
    return {k: v[0] if len(v) == 1 and k != "c" else v for k, v in params.items()}


_PARAM_KEYS = {"A", "c", "rho", "gamma", "r"}


def family_spec(name: str, params: dict) -> FamilySpec:
    unknown = set(params) - _PARAM_KEYS
    if unknown:
        raise InputError(f"unknown parameters {sorted(unknown)}; allowed: {sorted(_PARAM_KEYS)}")
    return FamilySpec(
        family=name,
        A=params.get("A", 1.0),
        coefficients=tuple(params.get("c", ())),
        rho=params.get("rho"),
        gamma=params.get("gamma"),
        r=params.get("r"),
    )


@dataclass
class AnalysisConfig:
    expression: Expression
    source: str
    family: Optional[dict]
    domain: list
    resolution: int
    tolerances: Tolerances
    convention: str = "paper"
    seed: int = 0
    out: Optional[Path] = None
    csv: Optional[Path] = None
    timing: bool = True

    def __post_init__(self):
        if self.expression.arity < 2:
            raise InputError("analysis needs a function of at least 2 variables")
        if self.resolution < 2:
            raise InputError("--grid must be >= 2")
        total = self.resolution ** self.expression.arity
        if total > MAX_POINTS:
            raise InputError(f"grid of {total} points exceeds the cap of {MAX_POINTS}")
        if self.convention not in CONVENTIONS:
            raise InputError(f"--convention must be one of {sorted(CONVENTIONS)}")


def _config_from_args(args) -> AnalysisConfig:
    if sum(x is not None for x in (args.expr, args.family, args.expr_file)) != 1:
        raise InputError("give exactly one of --expr, --expr-file or --family")
    names = [v.strip() for v in args.vars.split(",")] if args.vars else None
    family = None
    if args.family is not None:
        params = parse_params(args.params)
        spec = family_spec(args.family, params)
        if names is not None:
            n = len(names)
        elif spec.family == "counterexample-r1":
            n = 3
        else:
            n = len(spec.coefficients)
        built = build(spec, n, names)
        expression = built.expression
        source = to_source(expression)
        family = {"name": spec.family, "params": params, "degree": built.degree}
    else:
        source = args.expr if args.expr is not None else Path(args.expr_file).read_text(encoding="utf-8").strip()
        # without --vars, variables are the free identifiers in order of first use
        expression = parse(source, names if names is not None else free_identifiers(source))
    tol = Tolerances(
        flat=args.tol_flat if args.tol_flat is not None else Tolerances.flat,
        degree=args.tol_degree if args.tol_degree is not None else Tolerances.degree,
    )
    return AnalysisConfig(
        expression=expression,
        source=source,
        family=family,
        domain=parse_domain(args.domain, expression.arity),
        resolution=args.grid,
        tolerances=tol,
        convention=args.convention,
        seed=args.seed,
        out=Path(args.out) if args.out else None,
        csv=Path(args.csv) if args.csv else None,
        timing=not args.no_timing,
    )


def run_analysis(cfg: AnalysisConfig) -> tuple[dict, object]:
    """Run the full pipeline; returns the report dict and the curvature sweep."""
    start = time.perf_counter()
    expr = cfg.expression
    n = expr.arity
    hpts = quasi_random(n, HOMOGENEITY_POINTS, cfg.domain, cfg.seed)
    cpts = lattice(n, cfg.resolution, cfg.domain)
    sweep = curvature_sweep(expr, cpts, cfg.convention, cfg.tolerances.flat, cfg.tolerances.gk)
    cls = classify(expr, hpts, tol=cfg.tolerances, convention=cfg.convention, sweep=sweep)
    econ = economic_diagnostics(expr, hpts)
    t = cfg.tolerances
    report = {
        "schema": SCHEMA_ID,
        "tool": {"name": "hypersurf", "version": __version__},
        "config": {
            "expression": to_source(expr),
            "source": cfg.source,
            "variables": list(expr.variables),
            "family": cfg.family,
            "domain": [[lo, hi] for lo, hi in cfg.domain],
            "grid_resolution": cfg.resolution,
            "homogeneity_points": HOMOGENEITY_POINTS,
            "seed": cfg.seed,
            "convention": cfg.convention,
            "tolerances": {"flat": t.flat, "gk": t.gk, "degree": t.degree,
                           "unit_degree": t.unit_degree, "fit": t.fit},
        },
        "homogeneity": homogeneity_dict(cls.homogeneity),
        "economics": economics_dict(econ),
        "curvature": curvature_dict(sweep),
        "classification": classification_dict(cls),
    }
    if cfg.timing:
        report["runtime"] = {"wall_clock_seconds": time.perf_counter() - start}
    return report, sweep


def cmd_analyze(args) -> int:
    cfg = _config_from_args(args)
    report, sweep = run_analysis(cfg)
    text = dumps(report)
    if cfg.csv:
        write_graph_csv(cfg.csv, sweep)
    if cfg.out:
        cfg.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_ushakov(args) -> int:
    surface = UshakovSurface(parse(args.g, ["t"]), parse(args.h, ["t"]),
                             parse_range(args.t_range), parse_range(args.s_range))
    mesh = ushakov_mesh(surface, args.resolution)
    if args.out:
        write_ushakov_csv(args.out, mesh)
    summary = {
        "g": args.g,
        "h": args.h,
        "t_range": list(surface.t_range),
        "s_range": list(surface.s_range),
        "resolution": args.resolution,
        "rows": int(mesh.K.size),
        "singular_points": int(mesh.singular.sum()),
        "max_abs_K": None if np.isnan(mesh.max_abs_K) else mesh.max_abs_K,
    }
    sys.stdout.write(dumps(summary))
    return 0


def cmd_ode_check(args) -> int:
    sol = solve_profile_ode(args.r, args.c, parse_range(args.u_range))
    if args.out:
        write_ode_csv(args.out, sol)
    c1, c2 = sol.profile_coefficients
    sys.stdout.write(dumps({
        "r": sol.r,
        "c": sol.c,
        "u_range": [float(sol.u[0]), float(sol.u[-1])],
        "steps": sol.steps,
        "local_error_estimate": sol.local_error,
        "max_error": sol.max_error,
        "profile": {"c1": c1, "c2": c2},
    }))
    return 0


def cmd_families(args) -> int:
    sys.stdout.write(dumps(list_families()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hypersurf", description="Curvature of graph hypersurfaces and homogeneous production functions")
    ap.add_argument("--version", action="version", version=f"hypersurf {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="classify z = f(x1..xn) on a grid and write a JSON report")
    a.add_argument("--expr", help="expression source, e.g. '(2*x+3*y)^1.5'")
    a.add_argument("--expr-file", help="UTF-8 file holding the expression")
    a.add_argument("--family", help="named family (see `hypersurf families`)")
    a.add_argument("--params", help="family parameters, e.g. A=1,rho=0.5,gamma=1,c=1,1")
    a.add_argument("--vars", help="comma-separated variable names (default: identifiers in order of first use)")
    a.add_argument("--domain", help="per-variable min:max, comma-separated (one range applies to all)")
    a.add_argument("--grid", type=int, default=9, help="lattice resolution per axis (default 9)")
    a.add_argument("--tol-flat", type=float, default=None)
    a.add_argument("--tol-degree", type=float, default=None)
    a.add_argument("--convention", choices=sorted(CONVENTIONS), default="paper",
                   help="curvature normalisation: paper divides by w^4, gauss by w^2")
    a.add_argument("--out", help="JSON report path (default stdout)")
    a.add_argument("--csv", help="per-point CSV path")
    a.add_argument("--seed", type=int, default=0, help="quasi-random sampling seed")
    a.add_argument("--no-timing", action="store_true", help="omit wall-clock timing for byte-stable output")
    a.set_defaults(func=cmd_analyze)

    u = sub.add_parser("ushakov", help="sample a developable surface from g(t), h(t) and verify K = 0")
    u.add_argument("--g", required=True)
    u.add_argument("--h", required=True)
    u.add_argument("--t-range", default="0.5:1.5")
    u.add_argument("--s-range", default="0:1")
    u.add_argument("--resolution", type=int, default=31)
    u.add_argument("--out", help="mesh CSV path")
    u.set_defaults(func=cmd_ushakov)

    o = sub.add_parser("ode-check", help="integrate the profile ODE and compare with its closed form")
    o.add_argument("--r", type=float, required=True)
    o.add_argument("--c", type=float, required=True)
    o.add_argument("--u-range", default="0.1:2")
    o.add_argument("--out", help="comparison table CSV path")
    o.set_defaults(func=cmd_ode_check)

    f = sub.add_parser("families", help="print the family catalog as JSON")
    f.set_defaults(func=cmd_families)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (MathError, HypersurfError) as exc:
        print(f"math error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
