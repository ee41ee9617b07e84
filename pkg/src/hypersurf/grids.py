"""Sample sets: regular lattices for curvature sweeps, quasi-random points for
degree estimation."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import InputError

DEFAULT_BOX = (0.5, 2.0)
MAX_POINTS = 100_000
THREADS_ENV = "HYPERSURF_THREADS"


def _bounds(bounds, n: int) -> np.ndarray:
    b = np.asarray(bounds if bounds is not None else [DEFAULT_BOX] * n, dtype=float)
    if b.shape == (2,):
        b = np.tile(b, (n, 1))
    if b.shape != (n, 2):
        raise InputError(f"need {n} (min, max) pairs, got shape {b.shape}")
    if not np.all(np.isfinite(b)) or np.any(b[:, 0] >= b[:, 1]):
        raise InputError(f"every axis needs finite min < max, got {b.tolist()}")
    return b


def lattice(n: int, resolution: int | Sequence[int] = 9, bounds=None, cap: int = MAX_POINTS) -> np.ndarray:
    """Regular tensor grid over a box, shape ``(prod(resolution), n)``.

    The last axis varies fastest.  Raises before allocating when the point
    count would exceed ``cap``.
    """
    if n < 1:
        raise InputError("grid dimension must be at least 1")
    b = _bounds(bounds, n)
    res = [int(resolution)] * n if np.ndim(resolution) == 0 else [int(r) for r in resolution]
    if len(res) != n or min(res) < 2:
        raise InputError(f"resolution must be >= 2 on each of {n} axes, got {res}")
    total = int(np.prod(res, dtype=object))
    if total > cap:
        raise InputError(f"grid of {total} points exceeds the cap of {cap}")
    axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(b, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def default_resolution(n: int, preferred: int = 9, cap: int = MAX_POINTS) -> int:
    """Largest per-axis resolution <= ``preferred`` whose lattice fits under ``cap``."""
    res = preferred
    while res > 2 and res ** n > cap:
        res -= 1
    return res


def quasi_random(n: int, count: int = 10, bounds=None, seed: int = 0) -> np.ndarray:
    """Scrambled Halton points in a box; deterministic for a given ``seed``."""
    if n < 1 or count < 1:
        raise InputError("need n >= 1 and count >= 1")
    b = _bounds(bounds, n)
    unit = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    return qmc.scale(unit, b[:, 0], b[:, 1])


def thread_count() -> int:
    """Worker cap from ``HYPERSURF_THREADS`` (default: CPU count)."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)


def map_chunks(fn: Callable[[np.ndarray], dict], points: np.ndarray, chunk: int = 8192) -> dict:
    """Apply ``fn`` to row-chunks of ``points`` and concatenate the array results.

    ``fn`` returns a dict of arrays whose first axis indexes the points.
    Chunks run on a thread pool (numpy releases the GIL in its kernels);
    output order never depends on scheduling.
    """
    m = points.shape[0]
    if m <= chunk:
        return fn(points)
    pieces = [points[k:k + chunk] for k in range(0, m, chunk)]
    workers = min(thread_count(), len(pieces))
    if workers == 1:
        parts = [fn(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, pieces))
    return {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}
