"""Pricing engines for embedded pension-plan options.

Three related benefit designs are covered, all priced per unit of starting
salary under arbitrage-free dynamics:

* the one-time second election to switch from an investment account to a
  formula pension, funding any shortfall (closed forms);
* the underpin (floor-offset) guarantee applied at retirement (Monte Carlo
  in the annual setting, a European PDE in the continuous setting);
* the Bermudan underpin, a switch option whose shortfall is covered by the
  sponsor (least-squares Monte Carlo / free-boundary PDE).
"""

from .closed_form import Bs1Result, FseResult, bs_one_period, fse_det_cont, fse_discrete, fse_stoch_cont, penultimate_value
from .frontier import BoundaryClass, Frontier, classify_continuous, classify_discrete, extract_frontier, f_discrete, h_discrete
from .mc import LsmcDiagnostics, McSpec, PathBatch, price_bermudan_lsmc, price_underpin_mc, simulate
from .model import MarketParams, PlanParams, PriceEstimate, StatePoint, abo, db_cost, dc_cost, salary_det
from .oracle import OracleSpec, dp_value
from .pde import GridSpec, RatioModel, ValueSurface, build_ratio_model, price_bermudan, price_european, solve_bermudan, solve_european

__all__ = [
    "Bs1Result",
    "BoundaryClass",
    "Frontier",
    "FseResult",
    "GridSpec",
    "LsmcDiagnostics",
    "MarketParams",
    "McSpec",
    "OracleSpec",
    "PathBatch",
    "PlanParams",
    "PriceEstimate",
    "RatioModel",
    "StatePoint",
    "ValueSurface",
    "abo",
    "bs_one_period",
    "build_ratio_model",
    "classify_continuous",
    "classify_discrete",
    "db_cost",
    "dc_cost",
    "dp_value",
    "extract_frontier",
    "f_discrete",
    "fse_det_cont",
    "fse_discrete",
    "fse_stoch_cont",
    "h_discrete",
    "penultimate_value",
    "price_bermudan",
    "price_bermudan_lsmc",
    "price_european",
    "price_underpin_mc",
    "salary_det",
    "simulate",
    "solve_bermudan",
    "solve_european",
]

__version__ = "0.1.0"
