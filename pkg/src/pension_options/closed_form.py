"""Exact prices for the second-election option and the one-period rollback.

The second-election switch has closed-form costs in three settings
(stochastic salary / deterministic salary in continuous time, deterministic
salary in discrete time): the optimal switch time solves a one-dimensional
first-order condition, and the cost is an explicit function of that time.
All results are reported as cost additional to the plain defined-benefit
promise, per unit of salary at the valuation date.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .model import MarketParams, PlanParams, abo, abo_discount_rate, salary_det
from .rootfind import scan_roots

_DRIFT_EPS = 1e-12


@dataclass(frozen=True)
class FseResult:
    """Second-election valuation: additional cost and the optimal switch time.

    ``t_prime`` is the unclamped stationary point of the switch objective
    (``None`` when the objective is monotone on the admissible interval);
    ``t_star`` is the admissible maximizer.  ``t_star_at_bound`` marks
    solutions pinned at the valuation date, where the discrete formula's
    final-year salary index looks one year back from the switch.
    """

    extra_cost: float
    t_star: float
    t_prime: float | None
    total_cost: float
    t_star_at_bound: bool = False


@dataclass(frozen=True)
class Bs1Result:
    """One-period lognormal rollback value and its quantiles."""

    value: float
    d1: float
    d2: float


def _growth_integral(c: float, drift: float, span: float) -> float:
    # integral of c*e^{drift*u} du over [0, span], with the drift -> 0 limit
    if abs(drift) < _DRIFT_EPS:
        return c * span
    return c * (np.exp(drift * span) - 1.0) / drift


def fse_stoch_cont(t: float, l: float, p: PlanParams, m: MarketParams) -> FseResult:
    """Second-election cost, hedgeable stochastic salary, continuous switching.

    The switch objective per unit salary is
    ``c (u - t) - u b a(T) e^{-g (T-u)} + T b a(T)`` and its stationary point
    solves ``c - b a(T) e^{-g (T-u)} (1 + g u) = 0`` with ``g`` the ABO
    discount rate.  Independent of both volatilities by construction.
    """
    _check_window(t, p)
    gamma = abo_discount_rate(p, m)
    ba = p.b * p.annuity_factor

    def foc(u):
        return p.c - ba * np.exp(-gamma * (p.T - u)) * (1.0 + gamma * u)

    def objective(u: float) -> float:
        return p.c * (u - t) - u * ba * np.exp(-gamma * (p.T - u))

    t_prime, t_star, extra = _maximize_continuous(foc, objective, t, p.T)
    db_part = p.T * ba
    return FseResult(
        extra_cost=l * extra,
        t_star=t_star,
        t_prime=t_prime,
        total_cost=l * (extra + db_part),
        t_star_at_bound=(t_star == t),
    )


def fse_det_cont(t: float, l: float, p: PlanParams, m: MarketParams) -> FseResult:
    """Second-election cost, deterministic salary, continuous switching.

    Coincides with :func:`fse_stoch_cont` when salary growth equals the
    risk-free rate and the ABO discount equals the risk-free rate.
    """
    _check_window(t, p)
    gamma = abo_discount_rate(p, m)
    ba = p.b * p.annuity_factor
    drift = m.mu_l - m.r
    coef = drift + gamma

    def foc(u):
        return p.c - ba * np.exp(-gamma * (p.T - u)) * (1.0 + coef * u)

    def objective(u: float) -> float:
        grow = np.exp(drift * (u - t))
        return _growth_integral(p.c, drift, u - t) - u * ba * grow * np.exp(-gamma * (p.T - u))

    t_prime, t_star, extra = _maximize_continuous(foc, objective, t, p.T)
    db_part = p.T * ba * np.exp(drift * (p.T - t))
    return FseResult(
        extra_cost=l * extra,
        t_star=t_star,
        t_prime=t_prime,
        total_cost=l * (extra + db_part),
        t_star_at_bound=(t_star == t),
    )


def fse_discrete(t: int, l: float, p: PlanParams, m: MarketParams) -> FseResult:
    """Second-election cost with annual switch dates, deterministic salary.

    Exhaustive maximum over switch years ``t, ..., T``.  The formula indexes
    the final-year salary at ``t* - 1``; at ``t* = t`` that index precedes
    the valuation date, which is flagged rather than adjusted.
    """
    _check_window(t, p)
    if t != int(t):
        raise ValueError(f"discrete valuation time must be an integer year, got {t}")
    horizon = int(round(p.T))
    if abs(p.T - horizon) > 1e-9:
        raise ValueError(f"discrete setting requires an integer horizon, got T={p.T}")
    t = int(t)
    gamma = abo_discount_rate(p, m)
    ba = p.b * p.annuity_factor
    drift = m.mu_l - m.r

    candidates = np.arange(t, horizon + 1, dtype=float)
    if abs(drift) < _DRIFT_EPS:
        contrib = p.c * (candidates - t)
    else:
        contrib = p.c * (1.0 - np.exp(drift * (candidates - t))) / (1.0 - np.exp(drift))
    abo_offset = (candidates * ba
                  * np.exp(m.mu_l * (candidates - 1.0 - t))
                  * np.exp(-m.r * candidates)
                  * np.exp(-gamma * (p.T - candidates)))
    values = contrib - abo_offset
    best = int(np.argmax(values))
    db_part = p.T * ba * np.exp(m.mu_l * (p.T - 1.0)) * np.exp(-m.r * (p.T - t))
    return FseResult(
        extra_cost=l * float(values[best]),
        t_star=float(candidates[best]),
        t_prime=None,
        total_cost=l * float(values[best] + db_part),
        t_star_at_bound=(int(candidates[best]) == t),
    )


def bs_one_period(w: float, p: PlanParams, m: MarketParams) -> Bs1Result:
    """Hold value one year before retirement via the lognormal closed form.

    The account plus the final contribution, ``w + c L_{T-1}``, grows
    lognormally for one year against the fixed retirement strike
    ``b T L_{T-1} a(T)``.
    """
    if w < 0.0:
        raise ValueError(f"account balance must be non-negative, got {w}")
    horizon = int(round(p.T))
    if abs(p.T - horizon) > 1e-9:
        raise ValueError(f"one-period rollback requires an integer horizon, got T={p.T}")
    l_last = salary_det(horizon - 1, p, m)
    spot = w + p.c * l_last
    strike = p.b * horizon * l_last * p.annuity_factor
    if spot <= 0.0:
        return Bs1Result(value=0.0, d1=-np.inf, d2=-np.inf)
    if m.sigma_s == 0.0:
        fwd = spot - strike * np.exp(-m.r)
        d = np.inf if fwd > 0.0 else -np.inf
        return Bs1Result(value=max(fwd, 0.0), d1=d, d2=d)
    d1 = (np.log(spot / strike) + m.r + 0.5 * m.sigma_s**2) / m.sigma_s
    d2 = d1 - m.sigma_s
    value = norm.cdf(d1) * spot - norm.cdf(d2) * strike * np.exp(-m.r)
    return Bs1Result(value=float(value), d1=float(d1), d2=float(d2))


def penultimate_value(w: float, p: PlanParams, m: MarketParams) -> float:
    """Switch-option value one year before retirement: max(exercise, hold)."""
    horizon = int(round(p.T))
    exercise = max(w - abo(horizon - 1, p, m, mode="discrete"), 0.0)
    return max(exercise, bs_one_period(w, p, m).value)


def _check_window(t: float, p: PlanParams) -> None:
    if not 0.0 <= t <= p.T:
        raise ValueError(f"valuation time must lie in [0, T], got {t}")


def _maximize_continuous(foc, objective, lo: float, hi: float):
    """Maximize a switch objective whose derivative has the sign of ``foc``.

    Returns ``(t_prime, t_star, best_value)`` where ``t_prime`` is the first
    stationary point inside the window (``None`` if there is none) and
    ``t_star`` the admissible maximizer: stationary points compete with both
    window endpoints, which covers monotone objectives.
    """
    roots = scan_roots(foc, lo, hi)
    candidates = [lo, hi] + roots
    values = [objective(u) for u in candidates]
    best = int(np.argmax(values))
    t_prime = roots[0] if roots else None
    return t_prime, float(candidates[best]), float(values[best])
