"""Exercise-boundary structure: finiteness regimes and frontier extraction.

Whether switching can ever be optimal hinges on the ratio of the
contribution rate to the discounted accrual value.  Below 1 the boundary is
finite at every date; above 1 there is an initial span of dates where no
account balance justifies switching; far above 1 the switch never happens
before retirement and the plan degenerates to a plain underpin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .model import MarketParams, PlanParams, abo_discount_rate
from .rootfind import scan_roots

ALL_FINITE = "AllFinite"
PARTIALLY_INFINITE = "PartiallyInfinite"
DEGENERATE_EUROPEAN = "DegenerateEuropean"
KNIFE_EDGE = "KnifeEdge"

KNIFE_EDGE_TOL = 1e-12
BOUNDARY_ABS_TOL = 1e-8
BOUNDARY_REL_TOL = 1e-6


@dataclass(frozen=True)
class BoundaryClass:
    """Boundary finiteness regime with the critical switch times.

    ``t_star`` is the last integer date at which no balance justifies
    switching (discrete setting only); ``t_prime`` is the real root of the
    underlying crossing equation when one exists in the admissible window.
    """

    regime: str
    t_star: int | None
    t_prime: float | None
    ratio: float


@dataclass(frozen=True)
class Frontier:
    """Per-date exercise thresholds; ``inf`` marks dates that never exercise."""

    times: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) != len(self.phi):
            raise ValueError("times and phi must have equal length")

    @property
    def is_infinite(self) -> np.ndarray:
        return np.isinf(self.phi)


def critical_ratio(p: PlanParams, m: MarketParams) -> float:
    """Contribution rate over discounted accrual value, c / (b a(T) e^{-rT})."""
    return p.c / (p.b * p.annuity_factor * np.exp(-m.r * p.T))


def f_discrete(t, p: PlanParams, m: MarketParams, l0: float = 1.0):
    """Asymptotic exercise-minus-hold gap at large balances, year ``t``.

    ``f(t) = (t+1) b L_t a(T) e^{-g(T-t-1)} e^{-r} - t b L_{t-1} a(T) e^{-g(T-t)} - c L_t``
    with ``g`` the ABO discount rate (equal to ``r`` unless overridden).
    A negative value means the boundary is infinite at ``t``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > p.T - 1.0 + 1e-9):
        raise ValueError(f"f_discrete is defined for t in [0, T-1], got {t}")
    gamma = abo_discount_rate(p, m)
    ba = p.b * p.annuity_factor
    l_t = l0 * np.exp(m.mu_l * t_arr)
    l_prev = l0 * np.exp(m.mu_l * (t_arr - 1.0))
    out = ((t_arr + 1.0) * ba * l_t * np.exp(-gamma * (p.T - t_arr - 1.0) - m.r)
           - t_arr * ba * l_prev * np.exp(-gamma * (p.T - t_arr))
           - p.c * l_t)
    return float(out) if out.ndim == 0 else out


def h_discrete(t, p: PlanParams, m: MarketParams, l0: float = 1.0):
    """Salary-deflated gap ``h(t) = f(t) e^{-mu_l t}``, strictly increasing in ``t``."""
    t_arr = np.asarray(t, dtype=float)
    return f_discrete(t, p, m, l0=l0) * np.exp(-m.mu_l * t_arr)


def classify_discrete(p: PlanParams, m: MarketParams, l0: float = 1.0) -> BoundaryClass:
    """Boundary regime for annual exercise dates.

    The regime follows the critical ratio; the last never-exercise date
    ``t_star`` comes from an exact integer sign scan of :func:`f_discrete`,
    cross-checked against the floor of the real root.
    """
    horizon = int(round(p.T))
    if abs(p.T - horizon) > 1e-9:
        raise ValueError(f"discrete classification requires an integer horizon, got T={p.T}")
    ratio = critical_ratio(p, m)
    if abs(ratio - 1.0) < KNIFE_EDGE_TOL:
        return BoundaryClass(regime=KNIFE_EDGE, t_star=0, t_prime=0.0, ratio=ratio)
    if ratio < 1.0:
        return BoundaryClass(regime=ALL_FINITE, t_star=None, t_prime=None, ratio=ratio)

    years = np.arange(horizon, dtype=float)
    f_vals = f_discrete(years, p, m, l0=l0)
    nonpos = np.flatnonzero(f_vals <= 0.0)
    t_star = int(nonpos[-1]) if nonpos.size else 0
    roots = scan_roots(lambda u: f_discrete(u, p, m, l0=l0), 0.0, horizon - 1.0)
    t_prime = roots[0] if roots else None

    if f_vals[-1] < 0.0:
        return BoundaryClass(regime=DEGENERATE_EUROPEAN, t_star=horizon - 1,
                             t_prime=t_prime, ratio=ratio)
    if t_prime is not None and int(np.floor(t_prime)) != t_star:
        warnings.warn(
            f"floor of the real crossing time {t_prime:.6f} disagrees with the "
            f"integer sign scan ({t_star}); keeping the sign-scan value",
            stacklevel=2,
        )
    return BoundaryClass(regime=PARTIALLY_INFINITE, t_star=t_star,
                         t_prime=t_prime, ratio=ratio)


def degenerate_threshold_discrete(p: PlanParams, m: MarketParams) -> float:
    """Contribution rate above which annual switching is never optimal before T."""
    return (p.b * p.annuity_factor
            * ((1.0 - np.exp(-m.mu_l)) * p.T + np.exp(-m.mu_l))
            * np.exp(-m.r))


def f_continuous(t, p: PlanParams, m: MarketParams, variant: str = "stochastic"):
    """Strike-growth-minus-contribution rate along the frontier, continuous time.

    ``f(t) = b a(T) e^{-g(T-t)} (1 + coef * t) - c`` where ``coef`` is the
    ABO rate ``g`` for hedgeable salary and ``g + mu_l - r`` for
    deterministic salary.  Exercise is impossible at dates where f < 0.
    """
    gamma = abo_discount_rate(p, m)
    coef = gamma if variant == "stochastic" else gamma + m.mu_l - m.r
    t_arr = np.asarray(t, dtype=float)
    ba = p.b * p.annuity_factor
    out = ba * np.exp(-gamma * (p.T - t_arr)) * (1.0 + coef * t_arr) - p.c
    return float(out) if out.ndim == 0 else out


def classify_continuous(p: PlanParams, m: MarketParams,
                        variant: str = "stochastic") -> BoundaryClass:
    """Boundary regime for continuous switching on the wealth-salary ratio."""
    if variant not in ("stochastic", "deterministic"):
        raise ValueError(f"variant must be 'stochastic' or 'deterministic', got {variant!r}")
    ratio = critical_ratio(p, m)
    if abs(ratio - 1.0) < KNIFE_EDGE_TOL:
        return BoundaryClass(regime=KNIFE_EDGE, t_star=None, t_prime=0.0, ratio=ratio)
    f0 = f_continuous(0.0, p, m, variant=variant)
    fT = f_continuous(p.T, p, m, variant=variant)
    if fT < 0.0:
        return BoundaryClass(regime=DEGENERATE_EUROPEAN, t_star=None, t_prime=None, ratio=ratio)
    if f0 >= 0.0:
        return BoundaryClass(regime=ALL_FINITE, t_star=None, t_prime=None, ratio=ratio)
    roots = scan_roots(lambda u: f_continuous(u, p, m, variant=variant), 0.0, p.T)
    t_prime = roots[0] if roots else None
    return BoundaryClass(regime=PARTIALLY_INFINITE, t_star=None, t_prime=t_prime, ratio=ratio)


def extract_frontier(surface, p: PlanParams, m: MarketParams) -> Frontier:
    """Exercise thresholds from a solved value surface.

    At each time level the threshold is the smallest in-the-money grid node
    whose value sits on the exercise payoff to within the boundary
    tolerance ``max(1e-8, 1e-6 |v|)``; levels with no such node get ``inf``.
    Refuses surfaces whose solver did not converge.
    """
    if not surface.converged:
        raise RuntimeError("cannot extract a frontier from a non-converged surface")
    ys = surface.ys
    phi = np.full(len(surface.times), np.inf)
    for i, k_t in enumerate(surface.strikes):
        v = surface.values[i]
        payoff = np.maximum(ys - k_t, 0.0)
        tol = np.maximum(BOUNDARY_ABS_TOL, BOUNDARY_REL_TOL * np.abs(v))
        on_payoff = (np.abs(v - payoff) <= tol) & (ys >= k_t)
        idx = np.flatnonzero(on_payoff)
        if idx.size:
            phi[i] = ys[idx[0]]
    return Frontier(times=surface.times.copy(), phi=phi)
