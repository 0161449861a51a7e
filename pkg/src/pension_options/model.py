"""Plan and market parameters, accrued-benefit strikes, and base plan costs.

Everything downstream (closed forms, Monte Carlo, PDE, oracle) prices per
unit of starting salary: the salary index is normalized to 1 at entry and
callers rescale externally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

METHOD_TAGS = ("ClosedForm", "MC", "LSMC", "PDE", "Oracle")

DISCRETE = "discrete"
CONTINUOUS = "continuous"
_MODES = (DISCRETE, CONTINUOUS)


@dataclass(frozen=True)
class PlanParams:
    """Pension design constants.

    Parameters
    ----------
    c : float
        Contribution rate into the investment account, as a fraction of
        salary per year.
    b : float
        Defined-benefit accrual rate per year of service.
    annuity_factor : float
        Value at retirement of a life pension of 1 per year.
    T : float
        Years from plan entry to retirement.
    gamma : float or None
        Discount rate used in the accrued-benefit-obligation calculation.
        ``None`` means "use the market risk-free rate".
    """

    c: float
    b: float
    annuity_factor: float
    T: float
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.c <= 0.0:
            raise ValueError(f"contribution rate c must be positive, got {self.c}")
        if self.b <= 0.0:
            raise ValueError(f"accrual rate b must be positive, got {self.b}")
        if self.annuity_factor <= 0.0:
            raise ValueError(f"annuity_factor must be positive, got {self.annuity_factor}")
        if self.T <= 0.0:
            raise ValueError(f"horizon T must be positive, got {self.T}")
        if self.gamma is not None and self.gamma < 0.0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class MarketParams:
    """Market and salary dynamics constants.

    ``sigma_l == 0`` selects the deterministic salary model (growth rate
    ``mu_l``); a positive ``sigma_l`` selects the hedgeable stochastic
    salary model with equity correlation ``rho``.
    """

    r: float
    sigma_s: float
    mu_l: float = 0.0
    sigma_l: float = 0.0
    rho: float = 0.0

    def __post_init__(self) -> None:
        if self.r < 0.0:
            raise ValueError(f"risk-free rate r must be non-negative, got {self.r}")
        if self.sigma_s < 0.0:
            raise ValueError(f"sigma_s must be non-negative, got {self.sigma_s}")
        if self.sigma_l < 0.0:
            raise ValueError(f"sigma_l must be non-negative, got {self.sigma_l}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class StatePoint:
    """Valuation state: elapsed service, account balance, current salary rate."""

    t: float
    w: float
    l: float = 1.0

    def __post_init__(self) -> None:
        if self.t < 0.0:
            raise ValueError(f"service time t must be non-negative, got {self.t}")
        if self.w < 0.0:
            raise ValueError(f"account balance w must be non-negative, got {self.w}")
        if self.l <= 0.0:
            raise ValueError(f"salary rate l must be positive, got {self.l}")


@dataclass(frozen=True)
class PriceEstimate:
    """A price with its statistical error (zero for deterministic methods)."""

    value: float
    std_error: float = 0.0
    method: str = "ClosedForm"

    def __post_init__(self) -> None:
        if self.std_error < 0.0:
            raise ValueError(f"std_error must be non-negative, got {self.std_error}")
        if self.method not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method!r}; expected one of {METHOD_TAGS}")


def abo_discount_rate(p: PlanParams, m: MarketParams) -> float:
    """Discount rate applied inside the accrued benefit obligation."""
    return m.r if p.gamma is None else p.gamma


def salary_det(t, p: PlanParams, m: MarketParams):
    """Deterministic salary index at service time ``t`` (1 at entry)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("service time t must be non-negative")
    out = np.exp(m.mu_l * t)
    return float(out) if out.ndim == 0 else out


def _require_integer_times(t: np.ndarray, what: str) -> None:
    if not np.allclose(t, np.round(t), rtol=0.0, atol=1e-9):
        raise ValueError(f"{what} requires integer times, got {t}")


def abo(t, p: PlanParams, m: MarketParams, mode: str = CONTINUOUS):
    """Accrued benefit obligation after ``t`` years of service.

    In ``discrete`` mode the benefit is based on the salary earned over the
    final completed year (the index at ``t - 1``) and ``t`` must be an
    integer; in ``continuous`` mode it is based on the current salary rate.
    The obligation is discounted from retirement at the plan's ABO rate.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > p.T + 1e-9):
        raise ValueError(f"service time must lie in [0, T], got {t}")
    gamma = abo_discount_rate(p, m)
    if mode == DISCRETE:
        _require_integer_times(t_arr, "discrete-mode abo")
        # t = 0 carries no accrual, so the t-1 salary index is never used there.
        ref_salary = np.where(t_arr > 0.0, np.exp(m.mu_l * (t_arr - 1.0)), 0.0)
    else:
        ref_salary = np.exp(m.mu_l * t_arr)
    out = p.b * t_arr * p.annuity_factor * ref_salary * np.exp(-gamma * (p.T - t_arr))
    return float(out) if out.ndim == 0 else out


def db_cost(p: PlanParams, m: MarketParams, mode: str = CONTINUOUS) -> float:
    """Present value at entry of the pure defined-benefit promise."""
    return float(np.exp(-m.r * p.T) * abo(p.T, p, m, mode=mode))


def dc_cost(p: PlanParams, m: MarketParams, mode: str = CONTINUOUS) -> float:
    """Present value at entry of the contribution stream into the account.

    Discrete mode sums annual contributions ``c * L_t`` paid at the start of
    each year ``t = 0, ..., T-1``; continuous mode integrates the same flow.
    Both collapse to ``c * T`` when salary growth equals the risk-free rate.
    """
    if mode not in _MODES:
        raise ValueError(f"mode must be one of {_MODES}, got {mode!r}")
    drift = m.mu_l - m.r
    if mode == DISCRETE:
        _require_integer_times(np.asarray([p.T]), "discrete-mode dc_cost")
        n = int(round(p.T))
        if abs(drift) < 1e-12:
            return p.c * n
        q = np.exp(drift)
        return float(p.c * (1.0 - q**n) / (1.0 - q))
    if abs(drift) < 1e-12:
        return p.c * p.T
    return float(p.c * (np.exp(drift * p.T) - 1.0) / drift)
