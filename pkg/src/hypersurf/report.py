"""JSON and CSV serialisation with 17 significant digits per float."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources
from typing import Any, Optional

import numpy as np

from .classify import Classification, ProfileSolution
from .geometry import CurvatureSweep, UshakovMesh
from .homogeneity import EconomicDiagnostics, HomogeneityReport

SCHEMA_ID = "hypersurf.analysis-report/1"


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _emit(obj: Any, indent: int, level: int, out: list):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise ValueError(f"non-finite float {obj!r} cannot be serialised")
        out.append(fmt(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, value) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(value, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[\n")
        for k, value in enumerate(items):
            out.append(pad)
            _emit(value, indent, level + 1, out)
            out.append(",\n" if k < len(items) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with every float written as ``%.17g``; key order is preserved."""
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def load_schema() -> dict:
    text = resources.files("hypersurf").joinpath("schemas/analysis_report.schema.json").read_text("utf-8")
    return json.loads(text)


def _finite_or_none(v: Optional[float]):
    return None if v is None or not math.isfinite(v) else float(v)


def stats(values: np.ndarray) -> dict:
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "max": float(v.max()), "mean": float(v.mean())}


def homogeneity_dict(h: HomogeneityReport) -> dict:
    return {
        "is_homogeneous": h.is_homogeneous,
        "degree": h.degree,
        "degree_stddev": h.degree_stddev,
        "euler_residual_max": h.euler_residual_max,
        "scaling_error_max": _finite_or_none(h.scaling_error_max),
        "returns_to_scale": h.returns_to_scale,
        "n_points": h.n_points,
    }


def economics_dict(e: EconomicDiagnostics) -> dict:
    return {
        "increasing_in_every_input": e.increasing,
        "diminishing_marginal_product": e.diminishing,
        "min_marginal_product": e.min_marginal,
        "max_own_second_derivative": e.max_own_second,
    }


def curvature_dict(sweep: CurvatureSweep) -> dict:
    # the two normalisations differ by a factor w^2
    w2 = sweep.w ** 2
    if sweep.convention == "gauss":
        rmax_w4, rmax_w2 = sweep.riemann_max_abs / w2, sweep.riemann_max_abs
    else:
        rmax_w4, rmax_w2 = sweep.riemann_max_abs, sweep.riemann_max_abs * w2
    return {
        "n_points": len(sweep),
        "convention": sweep.convention,
        "K": stats(sweep.K),
        "hessian_det": stats(sweep.hessian_det),
        "riemann_max_abs": stats(sweep.riemann_max_abs),
        "riemann_max_abs_by_convention": {"paper": stats(rmax_w4), "gauss": stats(rmax_w2)},
        "monge_ampere_residual": None if sweep.monge_ampere_residual is None else stats(sweep.monge_ampere_residual),
        "flat_fraction": float(np.mean(sweep.flat_flags)),
        "max_flat_ratio": float(np.max(sweep.flat_ratio)),
        "gk_zero_fraction": float(np.mean(sweep.gk_zero_flags)),
        "gk_relative_max": float(np.max(sweep.gk_relative)),
    }


def classification_dict(c: Classification) -> dict:
    return {
        "verdict": c.verdict,
        "degree": c.degree,
        "coefficients": None if c.coefficients is None else [float(v) for v in c.coefficients],
        "fit_residual": _finite_or_none(c.fit_residual),
        "flat": c.flat,
        "gk_zero": c.gk_zero,
        "gk_zero_but_not_flat": c.gk_zero_but_not_flat,
        "developable": c.developable,
        "economics": c.economics,
        "notes": list(c.notes),
    }


def _write_rows(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def write_graph_csv(path, sweep: CurvatureSweep):
    """Columns ``x1..xn,f,K,Rmax``."""
    n = sweep.points.shape[1]
    header = [f"x{i + 1}" for i in range(n)] + ["f", "K", "Rmax"]
    rows = (
        [fmt(v) for v in p] + [fmt(f), fmt(k), fmt(r)]
        for p, f, k, r in zip(sweep.points, sweep.values, sweep.K, sweep.riemann_max_abs)
    )
    _write_rows(path, header, rows)


def write_ushakov_csv(path, mesh: UshakovMesh):
    """Columns ``t,s,x,y,z,K``; ``K`` is left empty at singular points."""
    rows = (
        [fmt(t), fmt(s), fmt(p[0]), fmt(p[1]), fmt(p[2]), "" if math.isnan(k) else fmt(k)]
        for t, s, p, k in zip(mesh.t, mesh.s, mesh.xyz, mesh.K)
    )
    _write_rows(path, ["t", "s", "x", "y", "z", "K"], rows)


def write_ode_csv(path, sol: ProfileSolution):
    rows = (
        [fmt(u), fmt(a), fmt(b), fmt(abs(a - b))]
        for u, a, b in zip(sol.u, sol.w_numeric, sol.w_closed)
    )
    _write_rows(path, ["u", "w_numeric", "w_closed", "abs_error"], rows)
