"""Continuous-time pricers on the wealth-to-salary ratio.

With a hedgeable stochastic salary the pricing problem collapses to one
state variable, the ratio ``y = w / l``, driven by
``dY = c dt + sigma_Y Y dZ`` with no discounting.  With a deterministic
salary the same collapse works after factoring the salary index out of the
value function; the ratio then picks up a drift and discount rate equal to
the gap between the risk-free rate and salary growth (see
docs/ratio_reduction.md for the derivation).

The solver works in the de-drifted coordinate ``z = alpha(t) y + beta(t)``
chosen so that ``z`` is a martingale, and on the rescaled unknown
``w = alpha(t) v``.  The coordinate change removes the convection term --
which otherwise dominates the degenerate diffusion near ``y = 0``, exactly
where the contract is priced -- and the rescaling cancels the discount
term against it (both equal the rate/salary-growth gap), leaving a pure
diffusion ``w_t + sigma^2 (z - beta(t))^2 / 2 w_zz = 0`` with an
unconditional M-matrix under central differences and a unit-slope exercise
obstacle ``(z - beta(t) - alpha(t) k(t))^+``.  The early-exercise problem
is the variational inequality on that obstacle, solved by penalty
iteration; the European run of the same stepper prices the plain underpin
guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .model import MarketParams, PlanParams, PriceEstimate, abo_discount_rate

STOCHASTIC = "stochastic"
DETERMINISTIC = "deterministic"
VARIANTS = (STOCHASTIC, DETERMINISTIC)

CRANK_NICOLSON = "crank-nicolson"
RANNACHER = "rannacher"


@dataclass(frozen=True)
class RatioModel:
    """Coefficients of the ratio-space pricing PDE and the strike schedule.

    The generator is ``L v = (drift_coeff * y + source_coeff) v_y
    + sigma_y^2 y^2 / 2 v_yy - discount_coeff * v`` and the exercise payoff
    at time ``t`` is ``(y - strike_fn(t))^+``.
    """

    sigma_y: float
    drift_coeff: float
    source_coeff: float
    discount_coeff: float
    strike_fn: Callable[[np.ndarray], np.ndarray]
    variant: str = STOCHASTIC


@dataclass(frozen=True)
class GridSpec:
    """Finite-difference controls.  ``None`` fields resolve from the model."""

    y_max: float | None = None
    n_y: int = 800
    n_t: int | None = None
    penalty: float = 1e7
    tol: float = 1e-9
    scheme: str = RANNACHER
    max_penalty_iter: int = 50

    def __post_init__(self) -> None:
        if self.n_y < 50:
            raise ValueError(f"n_y must be at least 50, got {self.n_y}")
        if self.penalty < 1e6:
            raise ValueError(f"penalty must be at least 1e6, got {self.penalty}")
        if self.scheme not in (CRANK_NICOLSON, RANNACHER):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.tol <= 0.0:
            raise ValueError("tol must be positive")

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same spec with both grid directions refined by ``factor``."""
        n_t = None if self.n_t is None else self.n_t * factor
        return replace(self, n_y=self.n_y * factor, n_t=n_t)


@dataclass
class ValueSurface:
    """Discretized value function on the de-drifted grid.

    Level ``i`` holds values at the ratio nodes ``y_nodes(i) =
    (zs - betas[i]) / alphas[i]``; the terminal level coincides with the
    plain ratio axis.  Nodes with negative ratio sit outside the physical
    domain (the grid is rectangular in ``z``, the domain boundary moves).
    """

    times: np.ndarray
    zs: np.ndarray
    values: np.ndarray
    strikes: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    converged: bool
    diagnostics: dict

    def y_nodes(self, i: int) -> np.ndarray:
        return (self.zs - self.betas[i]) / self.alphas[i]

    def _level(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, self.times[-1]):
            raise ValueError(f"time {t} is not a grid level; nearest is {self.times[i]}")
        return i

    def price_at(self, t: float, y: float) -> float:
        """Surface value at ``(t, y)`` by cubic interpolation in ``z``."""
        i = self._level(t)
        z = self.alphas[i] * y + self.betas[i]
        return _interp_cubic(self.zs, self.values[i], float(z))


def _interp_cubic(grid: np.ndarray, vals: np.ndarray, x: float) -> float:
    """4-point Lagrange interpolation on a uniform grid (linear at the edges)."""
    h = grid[1] - grid[0]
    j = int(np.clip(np.floor((x - grid[0]) / h), 0, len(grid) - 2))
    if j < 1 or j > len(grid) - 3:
        w = (x - grid[j]) / h
        return float((1.0 - w) * vals[j] + w * vals[j + 1])
    s = (x - grid[j]) / h
    m1, z0, p1, p2 = vals[j - 1], vals[j], vals[j + 1], vals[j + 2]
    return float(
        -s * (s - 1.0) * (s - 2.0) / 6.0 * m1
        + (s * s - 1.0) * (s - 2.0) / 2.0 * z0
        - s * (s + 1.0) * (s - 2.0) / 2.0 * p1
        + s * (s * s - 1.0) / 6.0 * p2
    )


def build_ratio_model(p: PlanParams, m: MarketParams, variant: str = STOCHASTIC) -> RatioModel:
    """Ratio-space coefficients for either salary model.

    Stochastic (hedgeable) salary: volatility
    ``sqrt(sigma_s^2 + sigma_l^2 - 2 sigma_s sigma_l rho)``, zero drift
    coefficient and zero discounting.  Deterministic salary: equity
    volatility with drift and discount coefficient ``r - mu_l``, which
    vanishes when salary grows at the risk-free rate.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    gamma = abo_discount_rate(p, m)

    def strike_fn(t):
        t_arr = np.asarray(t, dtype=float)
        out = p.b * t_arr * p.annuity_factor * np.exp(-gamma * (p.T - t_arr))
        return float(out) if out.ndim == 0 else out

    if variant == STOCHASTIC:
        sigma_y = float(np.sqrt(m.sigma_s**2 + m.sigma_l**2 - 2.0 * m.sigma_s * m.sigma_l * m.rho))
        return RatioModel(sigma_y=sigma_y, drift_coeff=0.0, source_coeff=p.c,
                          discount_coeff=0.0, strike_fn=strike_fn, variant=variant)
    gap = m.r - m.mu_l
    return RatioModel(sigma_y=m.sigma_s, drift_coeff=gap, source_coeff=p.c,
                      discount_coeff=gap, strike_fn=strike_fn, variant=variant)


def default_y_max(model: RatioModel, p: PlanParams, m: MarketParams) -> float:
    """Truncation level for the terminal ratio: five times the larger of the
    final strike and the contributions compounded at the risk-free rate."""
    k_final = model.strike_fn(p.T)
    return 5.0 * max(k_final, p.c * p.T * np.exp(m.r * p.T))


def _drift_maps(model: RatioModel, times: np.ndarray, horizon: float):
    """Affine maps z = alpha(t) y + beta(t) that make z driftless."""
    gap = model.drift_coeff
    tau = horizon - times
    alphas = np.exp(gap * tau)
    if abs(gap) < 1e-14:
        betas = model.source_coeff * tau
    else:
        betas = model.source_coeff * (np.exp(gap * tau) - 1.0) / gap
    return alphas, betas


def _make_axes(model: RatioModel, grid: GridSpec, p: PlanParams, m: MarketParams):
    k_final = float(model.strike_fn(p.T))
    z_target = grid.y_max if grid.y_max is not None else default_y_max(model, p, m)
    if z_target <= k_final:
        raise ValueError(f"y_max={z_target} must exceed the final strike {k_final}")
    # snap the spacing so the terminal kink lands on a node
    h = z_target / grid.n_y
    h = k_final / max(1, int(round(k_final / h)))
    zs = h * np.arange(grid.n_y + 1)
    n_t = grid.n_t if grid.n_t is not None else int(round(100.0 * p.T))
    if n_t < 4 * p.T:
        raise ValueError(f"n_t must be at least 4*T, got {n_t}")
    times = np.linspace(0.0, p.T, n_t + 1)
    return zs, times


def _diffusion(model: RatioModel, zs: np.ndarray, beta: float) -> np.ndarray:
    # (z - beta)^2 vanishes on the moving image of y = 0, which is what keeps
    # the physical region self-contained; the coefficient is left unclamped
    # below the curve so the scheme stays smooth across it.
    return 0.5 * model.sigma_y**2 * (zs - beta) ** 2


def _apply_operator(a_over_h2: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = -2.0 * a_over_h2 * v
    out[1:-1] += a_over_h2[1:-1] * (v[:-2] + v[2:])
    # first and last rows: degenerate (a=0) at z=0, w_zz=0 far field
    out[0] = 0.0
    out[-1] = 0.0
    return out


def _banded_lhs(a_over_h2: np.ndarray, theta_dt: float) -> np.ndarray:
    n = len(a_over_h2)
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + theta_dt * 2.0 * a_over_h2
    ab[1, 0] = 1.0
    ab[1, -1] = 1.0
    ab[0, 2:] = -theta_dt * a_over_h2[1:-1]
    ab[2, :-2] = -theta_dt * a_over_h2[1:-1]
    return ab


def _solve(model: RatioModel, grid: GridSpec, p: PlanParams, m: MarketParams,
           obstacle: bool) -> ValueSurface:
    zs, times = _make_axes(model, grid, p, m)
    strikes = np.asarray(model.strike_fn(times), dtype=float)
    alphas, betas = _drift_maps(model, times, p.T)
    n_t = len(times) - 1
    dt = times[1] - times[0]
    h2 = (zs[1] - zs[0]) ** 2

    values = np.empty((n_t + 1, len(zs)))
    values[n_t] = np.maximum(zs - strikes[n_t], 0.0)

    max_iters_used = 0
    nonconverged = 0

    def step(w_known, a_new, a_old, payoff, theta, step_dt):
        nonlocal max_iters_used, nonconverged
        rhs0 = w_known
        if theta < 1.0:
            rhs0 = w_known + (1.0 - theta) * step_dt * _apply_operator(a_old, w_known)
        lhs = _banded_lhs(a_new, theta * step_dt)
        if not obstacle:
            return solve_banded((1, 1), lhs, rhs0, check_finite=False), True
        pen = grid.penalty * step_dt
        w = w_known
        active_prev = None
        for it in range(grid.max_penalty_iter):
            active = w < payoff
            ab = lhs.copy()
            ab[1] += pen * active
            rhs = rhs0 + pen * active * payoff
            w_next = solve_banded((1, 1), ab, rhs, check_finite=False)
            change = np.max(np.abs(w_next - w)) / max(1.0, np.max(np.abs(w_next)))
            same_set = active_prev is not None and np.array_equal(active, active_prev)
            w, active_prev = w_next, active
            if change < grid.tol or same_set:
                max_iters_used = max(max_iters_used, it + 1)
                return np.maximum(w, payoff), True
        max_iters_used = max(max_iters_used, grid.max_penalty_iter)
        nonconverged += 1
        return np.maximum(w, payoff), False

    all_ok = True
    work = values[n_t].copy()  # rescaled unknown w = alpha * v; alpha(T) = 1
    a_cache = _diffusion(model, zs, betas[n_t]) / h2
    for j in range(n_t - 1, -1, -1):
        a_new = _diffusion(model, zs, betas[j]) / h2
        payoff = np.maximum(zs - (betas[j] + alphas[j] * strikes[j]), 0.0)
        if grid.scheme == RANNACHER and j == n_t - 1:
            a_mid = _diffusion(model, zs, 0.5 * (betas[j] + betas[j + 1])) / h2
            w_mid, ok1 = step(work, a_mid, None, payoff, 1.0, 0.5 * dt)
            w_new, ok2 = step(w_mid, a_new, None, payoff, 1.0, 0.5 * dt)
            ok = ok1 and ok2
        else:
            w_new, ok = step(work, a_new, a_cache, payoff, 0.5, dt)
        values[j] = w_new / alphas[j]
        work = w_new
        a_cache = a_new
        all_ok &= ok

    diagnostics = {
        "max_penalty_iterations": max_iters_used,
        "nonconverged_steps": nonconverged,
        "n_y": len(zs) - 1,
        "n_t": n_t,
        "z_max": float(zs[-1]),
        "dt": float(dt),
        "obstacle": obstacle,
    }
    return ValueSurface(times=times, zs=zs, values=values, strikes=strikes,
                        alphas=alphas, betas=betas, converged=all_ok,
                        diagnostics=diagnostics)


def solve_bermudan(model: RatioModel, grid: GridSpec, p: PlanParams,
                   m: MarketParams) -> ValueSurface:
    """Early-exercise value surface via the penalty iteration."""
    return _solve(model, grid, p, m, obstacle=True)


def solve_european(model: RatioModel, grid: GridSpec, p: PlanParams,
                   m: MarketParams) -> ValueSurface:
    """No-exercise (underpin guarantee) value surface: same stepper, no obstacle.

    The additional cost of the underpin over the plain benefit promise is
    the value of this European claim at ``(0, w0/l0)``.
    """
    return _solve(model, grid, p, m, obstacle=False)


def _priced(surface: ValueSurface, y0: float) -> PriceEstimate:
    if not surface.converged:
        raise RuntimeError(
            f"penalty iteration failed to converge: {surface.diagnostics}")
    return PriceEstimate(value=surface.price_at(0.0, y0), std_error=0.0, method="PDE")


def price_bermudan(p: PlanParams, m: MarketParams, variant: str = STOCHASTIC,
                   grid: GridSpec | None = None, y0: float = 0.0) -> PriceEstimate:
    """Additional cost of the continuously exercisable switch option."""
    model = build_ratio_model(p, m, variant=variant)
    surface = solve_bermudan(model, grid or GridSpec(), p, m)
    return _priced(surface, y0)


def price_european(p: PlanParams, m: MarketParams, variant: str = STOCHASTIC,
                   grid: GridSpec | None = None, y0: float = 0.0) -> PriceEstimate:
    """Additional cost of the underpin guarantee in the continuous setting."""
    model = build_ratio_model(p, m, variant=variant)
    surface = solve_european(model, grid or GridSpec(), p, m)
    return _priced(surface, y0)
