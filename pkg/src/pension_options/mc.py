"""Risk-neutral path simulation and the annual-exercise pricers.

Paths are generated with exact lognormal year steps from a counter-based
(Philox) generator, so results are reproducible from the seed alone and
independent of how work is scheduled.  Antithetic pairs mirror both the
equity and the salary drivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    DISCRETE,
    MarketParams,
    PlanParams,
    PriceEstimate,
    abo,
    abo_discount_rate,
)

FIT_STREAM = 0
PRICE_STREAM = 1


@dataclass(frozen=True)
class McSpec:
    """Simulation controls: path count, seed, refinement, regression basis."""

    n_paths: int = 200_000
    steps_per_year: int = 1
    seed: int = 20170924
    antithetic: bool = True
    basis_degree: int = 3

    def __post_init__(self) -> None:
        if self.n_paths < 2:
            raise ValueError(f"n_paths must be at least 2, got {self.n_paths}")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling requires an even n_paths")
        if self.steps_per_year < 1:
            raise ValueError(f"steps_per_year must be >= 1, got {self.steps_per_year}")
        if not 1 <= self.basis_degree <= 6:
            raise ValueError(f"basis_degree must lie in [1, 6], got {self.basis_degree}")


@dataclass
class PathBatch:
    """Simulated annual quantities: growth factors, salary index, account balance.

    ``salary`` has a single row when the salary model is deterministic and
    broadcasts against the per-path arrays.  The balance follows
    ``W_{k+1} = (W_k + c L_k) * G_k`` with the contribution paid at the
    start of each year.
    """

    t0: int
    growth: np.ndarray
    salary: np.ndarray
    wealth: np.ndarray
    w0: float

    @property
    def n_paths(self) -> int:
        return self.wealth.shape[0]

    @property
    def n_years(self) -> int:
        return self.growth.shape[1]


def _rng(spec: McSpec, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[spec.seed, stream]))


def simulate(spec: McSpec, p: PlanParams, m: MarketParams, w0: float = 0.0,
             t0: int = 0, l0: float | None = None, stream: int = FIT_STREAM) -> PathBatch:
    """Simulate yearly growth factors, salaries, and account balances.

    Parameters
    ----------
    w0 : float
        Account balance at ``t0``.
    t0 : int
        First year of the simulation window; paths run to retirement.
    l0 : float, optional
        Salary index at ``t0``.  Defaults to the deterministic index
        ``exp(mu_l * t0)`` (1.0 for a stochastic salary started at entry).
    stream : int
        Substream selector; distinct streams are statistically independent.
    """
    if t0 != int(t0) or t0 < 0:
        raise ValueError(f"t0 must be a non-negative integer year, got {t0}")
    n_years = int(round(p.T)) - int(t0)
    if n_years < 1 or abs(p.T - round(p.T)) > 1e-9:
        raise ValueError(f"simulation needs an integer horizon beyond t0, got T={p.T}, t0={t0}")
    stochastic = m.sigma_l > 0.0
    if l0 is None:
        if stochastic and t0 != 0:
            raise ValueError("stochastic salary with t0 > 0 requires an explicit l0")
        l0 = float(np.exp(m.mu_l * t0)) if not stochastic else 1.0

    rng = _rng(spec, stream)
    n_steps = n_years * spec.steps_per_year
    dt = 1.0 / spec.steps_per_year
    half = spec.n_paths // 2 if spec.antithetic else spec.n_paths

    z_s = rng.standard_normal((half, n_steps))
    if stochastic:
        z_perp = rng.standard_normal((half, n_steps))
        z_l = m.rho * z_s + np.sqrt(max(1.0 - m.rho**2, 0.0)) * z_perp
    if spec.antithetic:
        z_s = np.vstack([z_s, -z_s])
        if stochastic:
            z_l = np.vstack([z_l, -z_l])

    log_s = (m.r - 0.5 * m.sigma_s**2) * dt + m.sigma_s * np.sqrt(dt) * z_s
    growth = np.exp(log_s.reshape(-1, n_years, spec.steps_per_year).sum(axis=2))

    if stochastic:
        log_l = (m.r - 0.5 * m.sigma_l**2) * dt + m.sigma_l * np.sqrt(dt) * z_l
        annual_l = log_l.reshape(-1, n_years, spec.steps_per_year).sum(axis=2)
        salary = np.empty((spec.n_paths, n_years + 1))
        salary[:, 0] = l0
        salary[:, 1:] = l0 * np.exp(np.cumsum(annual_l, axis=1))
    else:
        salary = l0 * np.exp(m.mu_l * np.arange(n_years + 1.0))[None, :]

    wealth = np.empty((spec.n_paths, n_years + 1))
    wealth[:, 0] = w0
    for k in range(n_years):
        wealth[:, k + 1] = (wealth[:, k] + p.c * salary[:, k]) * growth[:, k]
    return PathBatch(t0=int(t0), growth=growth, salary=salary, wealth=wealth, w0=w0)


def _mean_and_se(payoffs: np.ndarray, antithetic: bool) -> tuple[float, float]:
    if antithetic:
        half = payoffs.shape[0] // 2
        pairs = 0.5 * (payoffs[:half] + payoffs[half:])
        return float(pairs.mean()), float(pairs.std(ddof=1) / np.sqrt(half))
    return float(payoffs.mean()), float(payoffs.std(ddof=1) / np.sqrt(payoffs.shape[0]))


def _strike_paths(batch: PathBatch, p: PlanParams, m: MarketParams) -> np.ndarray:
    """Per-path switch strike (accrued obligation) at each year of the window."""
    gamma = abo_discount_rate(p, m)
    years = batch.t0 + np.arange(batch.n_years + 1.0)
    if m.sigma_l > 0.0:
        strikes = np.zeros_like(batch.wealth)
        for k, s in enumerate(years):
            if s == 0.0:
                continue
            if k == 0:
                raise ValueError("stochastic-salary strikes need the pre-window salary; start at t0 = 0")
            strikes[:, k] = (p.b * s * p.annuity_factor * batch.salary[:, k - 1]
                             * np.exp(-gamma * (p.T - s)))
        return strikes
    return abo(years, p, m, mode=DISCRETE)[None, :]


def _dc_db_effective(p: PlanParams, m: MarketParams) -> tuple[float, float]:
    """Contribution and benefit PVs consistent with the simulated salary model."""
    from .model import db_cost, dc_cost

    if m.sigma_l > 0.0:
        # hedgeable salary drifts at r, so the valuation matches mu_l = r
        m = MarketParams(r=m.r, sigma_s=m.sigma_s, mu_l=m.r, sigma_l=0.0, rho=0.0)
    return dc_cost(p, m, mode=DISCRETE), db_cost(p, m, mode=DISCRETE)


def price_underpin_mc(spec: McSpec, p: PlanParams, m: MarketParams,
                      w0: float = 0.0, put_form: bool = False) -> PriceEstimate:
    """Additional cost of the underpin guarantee over the plain benefit promise.

    Estimates the retirement-date call ``E[e^{-rT}(W_T - K_T)^+]``, which by
    the martingale identity for the contribution-funded account equals the
    full plan cost minus the benefit PV.  ``put_form=True`` instead
    estimates the shortfall put plus contribution PV minus benefit PV, a
    cross-check that agrees in expectation but not path by path.
    """
    batch = simulate(spec, p, m, w0=w0, t0=0, stream=PRICE_STREAM)
    strike_t = _strike_paths(batch, p, m)
    k_final = strike_t[:, -1] if strike_t.shape[0] > 1 else strike_t[0, -1]
    disc = np.exp(-m.r * p.T)
    if put_form:
        payoffs = disc * np.maximum(k_final - batch.wealth[:, -1], 0.0)
        dc, db = _dc_db_effective(p, m)
        shift = dc - db - w0
    else:
        payoffs = disc * np.maximum(batch.wealth[:, -1] - k_final, 0.0)
        shift = 0.0
    value, se = _mean_and_se(payoffs, spec.antithetic)
    return PriceEstimate(value=value + shift, std_error=se, method="MC")


@dataclass
class LsmcPolicy:
    """Fitted exercise rule: regression coefficients per date, or a scalar fallback."""

    coeffs: dict[int, np.ndarray]
    fallback_mean: dict[int, float]
    exercise_at_start: bool
    fit_value: float


@dataclass
class LsmcDiagnostics:
    """Pricing-pass exercise statistics and fit-pass regression quality."""

    dates: np.ndarray
    exercise_fraction: np.ndarray
    r_squared: np.ndarray
    fallback_dates: list[int] = field(default_factory=list)
    full_cost: float = np.nan
    fit_value: float = np.nan


def _basis(x: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(x, degree + 1, increasing=True)


def _fit_policy(batch: PathBatch, strike_t: np.ndarray, p: PlanParams, m: MarketParams,
                w0: float, degree: int) -> tuple[LsmcPolicy, np.ndarray, list[int]]:
    n = batch.n_years
    disc = np.exp(-m.r)
    wealth = batch.wealth
    per_path = strike_t.shape[0] > 1

    def strike_at(k: int) -> np.ndarray:
        return strike_t[:, k] if per_path else np.full(wealth.shape[0], strike_t[0, k])

    value = np.maximum(wealth[:, n] - strike_at(n), 0.0)
    coeffs: dict[int, np.ndarray] = {}
    fallback: dict[int, float] = {}
    r_squared = np.full(n + 1, np.nan)
    fallback_dates: list[int] = []

    for k in range(n - 1, 0, -1):
        value *= disc
        strike = strike_at(k)
        exercise = np.maximum(wealth[:, k] - strike, 0.0)
        itm = exercise > 0.0
        n_itm = int(itm.sum())
        if n_itm == 0:
            continue
        if n_itm < max(degree + 2, 10):
            fallback[k] = float(value[itm].mean())
            fallback_dates.append(k)
            cont = np.full(n_itm, fallback[k])
        else:
            x = wealth[itm, k] / strike[itm]
            design = _basis(x, degree)
            beta, _, rank, _ = np.linalg.lstsq(design, value[itm], rcond=None)
            if rank < degree + 1:
                fallback[k] = float(value[itm].mean())
                fallback_dates.append(k)
                cont = np.full(n_itm, fallback[k])
            else:
                coeffs[k] = beta
                cont = design @ beta
                resid = value[itm] - cont
                total = value[itm] - value[itm].mean()
                denom = float(total @ total)
                r_squared[k] = 1.0 - float(resid @ resid) / denom if denom > 0.0 else np.nan
        stop = itm.copy()
        stop[itm] = exercise[itm] >= cont
        value[stop] = exercise[stop]

    value *= disc
    e0 = max(w0 - float(strike_at(0)[0]), 0.0)
    cont0 = float(value.mean())
    exercise_at_start = e0 > 0.0 and e0 >= cont0
    fit_value = e0 if exercise_at_start else cont0
    policy = LsmcPolicy(coeffs=coeffs, fallback_mean=fallback,
                        exercise_at_start=exercise_at_start, fit_value=fit_value)
    return policy, r_squared, fallback_dates


def _apply_policy(policy: LsmcPolicy, batch: PathBatch, strike_t: np.ndarray,
                  m: MarketParams, degree: int) -> tuple[np.ndarray, np.ndarray]:
    n = batch.n_years
    wealth = batch.wealth
    per_path = strike_t.shape[0] > 1
    payoff = np.zeros(wealth.shape[0])
    stop_counts = np.zeros(n + 1)
    alive = np.ones(wealth.shape[0], dtype=bool)

    for k in range(1, n):
        strike = strike_t[:, k] if per_path else strike_t[0, k]
        exercise = np.maximum(wealth[:, k] - strike, 0.0)
        candidates = alive & (exercise > 0.0)
        if not candidates.any():
            continue
        if k in policy.coeffs:
            x = wealth[candidates, k] / (strike[candidates] if per_path else strike)
            cont = _basis(x, degree) @ policy.coeffs[k]
        elif k in policy.fallback_mean:
            cont = policy.fallback_mean[k]
        else:
            continue
        stop = candidates.copy()
        stop[candidates] = exercise[candidates] >= cont
        payoff[stop] = np.exp(-m.r * k) * exercise[stop]
        stop_counts[k] = stop.sum()
        alive &= ~stop

    strike = strike_t[:, n] if per_path else strike_t[0, n]
    final = np.maximum(wealth[:, n] - strike, 0.0)
    payoff[alive] = np.exp(-m.r * n) * final[alive]
    stop_counts[n] = int((alive & (final > 0.0)).sum())
    return payoff, stop_counts / wealth.shape[0]


def price_bermudan_lsmc(spec: McSpec, p: PlanParams, m: MarketParams,
                        t0: int = 0, w0: float = 0.0,
                        return_diagnostics: bool = False):
    """Annual-exercise switch option by least-squares Monte Carlo.

    Fits the exercise rule on one substream (cubic-by-default monomials of
    the balance-to-strike ratio, in-the-money paths only) and reports the
    low-biased estimate from replaying the fitted rule on a fresh substream.
    """
    batch_fit = simulate(spec, p, m, w0=w0, t0=t0, stream=FIT_STREAM)
    strike_fit = _strike_paths(batch_fit, p, m)
    policy, r_squared, fallback_dates = _fit_policy(
        batch_fit, strike_fit, p, m, w0, spec.basis_degree)

    n = batch_fit.n_years
    if policy.exercise_at_start:
        strike0 = strike_fit[0, 0]
        estimate = PriceEstimate(value=max(w0 - float(strike0), 0.0),
                                 std_error=0.0, method="LSMC")
        fractions = np.zeros(n + 1)
        fractions[0] = 1.0
    else:
        batch_price = simulate(spec, p, m, w0=w0, t0=t0, stream=PRICE_STREAM)
        strike_price = _strike_paths(batch_price, p, m)
        payoff, fractions = _apply_policy(policy, batch_price, strike_price, m, spec.basis_degree)
        value, se = _mean_and_se(payoff, spec.antithetic)
        estimate = PriceEstimate(value=value, std_error=se, method="LSMC")

    if not return_diagnostics:
        return estimate
    gamma = abo_discount_rate(p, m)
    if m.sigma_l > 0.0:
        db_pv = p.b * p.T * p.annuity_factor * np.exp(-m.r)  # E[L_{T-1}] = e^{r(T-1)}
    else:
        db_pv = (np.exp(-m.r * (p.T - t0))
                 * p.b * p.T * p.annuity_factor * np.exp(m.mu_l * (p.T - 1.0))
                 * np.exp(-gamma * 0.0))
    diagnostics = LsmcDiagnostics(
        dates=np.arange(n + 1) + t0,
        exercise_fraction=fractions,
        r_squared=r_squared,
        fallback_dates=sorted(fallback_dates),
        full_cost=float(db_pv + estimate.value - w0),
        fit_value=policy.fit_value,
    )
    return estimate, diagnostics
