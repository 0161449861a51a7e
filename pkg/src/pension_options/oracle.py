"""Brute-force valuation of the annual switch option on a balance grid.

Backward induction over the yearly lognormal transition, independent of the
simulation and regression machinery, for cross-checking on short horizons.
The final-year expectation integrates the true payoff with a kink-split
composite Gauss-Legendre rule (no special functions, so the one-period
closed form stays a genuine cross-check); earlier years integrate the
piecewise-linear value interpolant exactly through lognormal partial
moments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.stats import norm

from .model import DISCRETE, MarketParams, PlanParams, PriceEstimate, abo

MAX_HORIZON = 10
Z_CUT = 10.0
_PANELS = 12

LINEAR = "linear"
MONOTONE_CUBIC = "monotone-cubic"


@dataclass(frozen=True)
class OracleSpec:
    """Grid and quadrature controls for the dynamic-programming oracle.

    ``n_quad`` is the Gauss-Legendre order used on each smooth panel of the
    split transition integral (the cubic-interpolation path integrates
    everything this way; the linear path needs it only at the final year).
    The default balance ceiling is a five-log-standard-deviation bound on
    the compounded contributions, which keeps the grid spent where the
    value function actually varies.
    """

    w_max: float | None = None
    n_w: int = 1600
    n_quad: int = 32
    interpolation: str = LINEAR

    def __post_init__(self) -> None:
        if self.n_w < 200:
            raise ValueError(f"n_w must be at least 200, got {self.n_w}")
        if self.n_quad < 16:
            raise ValueError(f"n_quad must be at least 16, got {self.n_quad}")
        if self.interpolation not in (LINEAR, MONOTONE_CUBIC):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")


@dataclass
class DpSurface:
    """Backward-induction output: values and exercise decisions per year."""

    years: np.ndarray
    w: np.ndarray
    values: np.ndarray
    exercise: np.ndarray
    strikes: np.ndarray


def _gl_panels(lo: np.ndarray, hi: float, n_quad: int):
    """Composite Gauss-Legendre points/weights on [lo_i, hi] per row."""
    gx, gw = np.polynomial.legendre.leggauss(n_quad)
    frac = ((np.arange(_PANELS)[:, None] + 0.5 * (gx[None, :] + 1.0)) / _PANELS).ravel()
    wts = np.tile(0.5 * gw / _PANELS, _PANELS)
    width = hi - lo
    z = lo[:, None] + width[:, None] * frac[None, :]
    return z, width[:, None] * wts[None, :]


def _terminal_expectation(a: np.ndarray, strike: float, m_log: float, s: float,
                          n_quad: int) -> np.ndarray:
    """E[(a G - strike)^+] for lognormal G, exact payoff, kink-split quadrature."""
    if s == 0.0:
        return np.maximum(a * np.exp(m_log) - strike, 0.0)
    out = np.zeros_like(a)
    pos = a > 0.0
    z_star = np.full_like(a, np.inf)
    z_star[pos] = (np.log(strike / a[pos]) - m_log) / s
    live = pos & (z_star < Z_CUT)
    if not live.any():
        return out
    lo = np.maximum(z_star[live], -Z_CUT)
    z, wts = _gl_panels(lo, Z_CUT, n_quad)
    payoff = a[live, None] * np.exp(m_log + s * z) - strike
    density = np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
    out[live] = np.sum(np.maximum(payoff, 0.0) * density * wts, axis=1)
    return out


def _pl_expectation(a: np.ndarray, grid: np.ndarray, vals: np.ndarray,
                    m_log: float, s: float) -> np.ndarray:
    """E[f(a G)] for the piecewise-linear interpolant f of (grid, vals).

    Decomposes f into a base line plus slope kinks at the interior nodes,
    whose expectations are lognormal partial moments; the last slope extends
    beyond the grid, so no truncation is introduced.
    """
    h = np.diff(grid)
    slopes = np.diff(vals) / h
    growth = np.exp(m_log + 0.5 * s**2)
    if s == 0.0:
        x = a * np.exp(m_log)
        inside = np.interp(x, grid, vals)
        over = x > grid[-1]
        inside[over] = vals[-1] + slopes[-1] * (x[over] - grid[-1])
        return inside
    kink = np.diff(slopes)
    keep = np.flatnonzero(np.abs(kink) > 1e-15) + 1  # node indices with curvature
    out = vals[0] + slopes[0] * a * growth
    if keep.size:
        pos = a > 0.0
        log_a = np.where(pos, np.log(np.where(pos, a, 1.0)), -np.inf)
        d2 = (log_a[:, None] - np.log(grid[keep])[None, :] + m_log) / s
        d1 = d2 + s
        calls = (a[:, None] * growth * norm.cdf(d1)
                 - grid[None, keep] * norm.cdf(d2))
        out = out + calls @ kink[keep - 1]
        out[~pos] = vals[0]
    return out


def _cubic_expectation(a: np.ndarray, grid: np.ndarray, vals: np.ndarray,
                       m_log: float, s: float, n_quad: int) -> np.ndarray:
    """E[f(a G)] for the shape-preserving cubic interpolant, by quadrature."""
    interp = PchipInterpolator(grid, vals, extrapolate=False)
    tail_slope = (vals[-1] - vals[-2]) / (grid[-1] - grid[-2])

    def f(x):
        y = interp(np.minimum(x, grid[-1]))
        over = x > grid[-1]
        y[over] = vals[-1] + tail_slope * (x[over] - grid[-1])
        return y

    if s == 0.0:
        return f(a * np.exp(m_log))
    out = np.full_like(a, vals[0])
    pos = a > 0.0
    if not pos.any():
        return out
    lo = np.full(int(pos.sum()), -Z_CUT)
    z, wts = _gl_panels(lo, Z_CUT, n_quad)
    x = a[pos, None] * np.exp(m_log + s * z)
    density = np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
    out[pos] = np.sum(f(x.ravel()).reshape(x.shape) * density * wts, axis=1)
    return out


def _default_w_max(t0: int, w0: float, p: PlanParams, m: MarketParams) -> float:
    horizon = int(round(p.T))
    years = horizon - t0
    total_contrib = p.c * np.exp(m.mu_l * np.arange(t0, horizon)).sum()
    return (w0 + total_contrib) * np.exp(m.r * years + 5.0 * m.sigma_s * np.sqrt(years))


def dp_solve(t0: int, w0: float, spec: OracleSpec, p: PlanParams, m: MarketParams,
             allow_early: bool = True) -> DpSurface:
    """Full backward induction; see :func:`dp_value` for the pointwise wrapper."""
    horizon = int(round(p.T))
    if abs(p.T - horizon) > 1e-9 or t0 != int(t0):
        raise ValueError("the oracle requires integer t0 and T")
    n_years = horizon - int(t0)
    if n_years < 1:
        raise ValueError(f"need at least one year before retirement, got t0={t0}, T={p.T}")
    if n_years > MAX_HORIZON:
        raise ValueError(
            f"oracle horizon {n_years} exceeds the {MAX_HORIZON}-year guard; "
            "dense backward induction is meant for short cross-checks")
    if m.sigma_l != 0.0:
        raise ValueError("the oracle covers the deterministic salary model only")

    w_max = spec.w_max if spec.w_max is not None else _default_w_max(t0, w0, p, m)
    if w_max <= w0:
        raise ValueError(f"w_max={w_max} must exceed the starting balance {w0}")
    w = np.linspace(0.0, w_max, spec.n_w + 1)
    years = np.arange(int(t0), horizon + 1)
    strikes = abo(years, p, m, mode=DISCRETE)
    m_log = m.r - 0.5 * m.sigma_s**2
    disc = np.exp(-m.r)

    values = np.empty((n_years + 1, spec.n_w + 1))
    exercise = np.zeros((n_years + 1, spec.n_w + 1), dtype=bool)
    values[n_years] = np.maximum(w - strikes[-1], 0.0)
    exercise[n_years] = w > strikes[-1]

    for k in range(n_years - 1, -1, -1):
        t_abs = years[k]
        a = w + p.c * np.exp(m.mu_l * t_abs)
        if k == n_years - 1:
            expect = _terminal_expectation(a, float(strikes[-1]), m_log, m.sigma_s, spec.n_quad)
        elif spec.interpolation == LINEAR:
            expect = _pl_expectation(a, w, values[k + 1], m_log, m.sigma_s)
        else:
            expect = _cubic_expectation(a, w, values[k + 1], m_log, m.sigma_s, spec.n_quad)
        cont = disc * expect
        if allow_early:
            payoff = np.maximum(w - strikes[k], 0.0)
            exercise[k] = (payoff > 0.0) & (payoff >= cont)
            values[k] = np.maximum(payoff, cont)
        else:
            values[k] = cont
    return DpSurface(years=years, w=w, values=values, exercise=exercise, strikes=strikes)


def dp_value(t0: int, w0: float, spec: OracleSpec, p: PlanParams, m: MarketParams,
             allow_early: bool = True, return_error_estimate: bool = False):
    """Switch-option value at ``(t0, w0)`` by dense backward induction.

    The error estimate (returned on request) is the change under halving the
    balance grid, which bounds the interpolation bias; the transition
    integrals themselves are exact or spectrally convergent.
    """
    surface = dp_solve(t0, w0, spec, p, m, allow_early=allow_early)
    value = float(np.interp(w0, surface.w, surface.values[0]))
    estimate = PriceEstimate(value=value, std_error=0.0, method="Oracle")
    if not return_error_estimate:
        return estimate
    coarse_spec = OracleSpec(w_max=spec.w_max, n_w=max(200, spec.n_w // 2),
                             n_quad=spec.n_quad, interpolation=spec.interpolation)
    coarse = dp_solve(t0, w0, coarse_spec, p, m, allow_early=allow_early)
    coarse_value = float(np.interp(w0, coarse.w, coarse.values[0]))
    return estimate, abs(value - coarse_value)
