"""Bracketed bisection on a dense sign-scan grid.

The switch-time and boundary-classification equations in this package are
monotone in their argument for every parameter set of interest, so a sign
scan followed by bisection is both safe and reproducible.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

SCAN_STEP = 1e-3  # years
RESIDUAL_TOL = 1e-10


def bisect(f: Callable[[float], float], lo: float, hi: float,
           residual_tol: float = RESIDUAL_TOL, max_iter: int = 200) -> float:
    """Bisect ``f`` on a bracketing interval ``[lo, hi]`` down to a residual tolerance."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"interval [{lo}, {hi}] does not bracket a root")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) < residual_tol or (hi - lo) < 1e-14:
            return mid
        if flo * fmid <= 0.0:
            hi = mid
        else:
            lo, flo = mid, fmid
    return 0.5 * (lo + hi)


def scan_roots(f: Callable[[float], float], lo: float, hi: float,
               step: float = SCAN_STEP) -> list[float]:
    """All roots of ``f`` on ``[lo, hi]`` found by sign scan plus bisection."""
    if hi <= lo:
        return []
    n = max(2, int(np.ceil((hi - lo) / step)) + 1)
    grid = np.linspace(lo, hi, n)
    try:
        vals = np.asarray(f(grid), dtype=float)
        if vals.shape != grid.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.array([f(g) for g in grid])
    roots: list[float] = []
    exact = np.flatnonzero(vals == 0.0)
    roots.extend(grid[i] for i in exact)
    crossings = np.flatnonzero(vals[:-1] * vals[1:] < 0.0)
    roots.extend(bisect(f, grid[i], grid[i + 1]) for i in crossings)
    return sorted(roots)
