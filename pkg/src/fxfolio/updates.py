"""Multiplicative weight updates tilted toward predicted returns.

Both rules move the drifted weights toward positions with high predicted
price relatives while a relative-entropy penalty keeps them close to
where the returns already put them.  The iitc rule tilts by the raw
prediction; the eiitc rule rescales the tilt by the predicted growth of
the drifted portfolio, which sharpens it whenever that growth is below
one.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParams, ZeroDiamond
from .market import ReturnMatrix
from .portfolio import PortfolioMatrix, gross_return, relative_entropy, uniform_portfolio


def _check_gamma(gamma: float) -> None:
    if gamma < 0.0 or not math.isfinite(gamma):
        raise InvalidParams(f"gamma must be finite and >= 0, got {gamma!r}")


def _tilt(realized: PortfolioMatrix, exponents: np.ndarray, support_floor: float) -> PortfolioMatrix:
    w = realized.weights
    active = w > 0.0
    # Shift before exponentiating; with a zero shift the factors are exactly 1.
    shift = float(exponents[active].max())
    factors = np.zeros_like(w)
    factors[active] = np.exp(exponents[active] - shift)
    out = w * factors
    out = out / out.sum()
    if support_floor > 0.0:
        out = (1.0 - support_floor) * out + support_floor * uniform_portfolio(realized.m).weights
    return PortfolioMatrix(day=realized.day + 1, weights=out)


def iitc_update(
    realized: PortfolioMatrix,
    r_pred: ReturnMatrix,
    gamma: float,
    support_floor: float = 0.0,
) -> PortfolioMatrix:
    """Next-day weights proportional to realized * exp(gamma * predicted return)."""
    _check_gamma(gamma)
    if not (0.0 <= support_floor < 1.0):
        raise InvalidParams(f"support_floor must lie in [0, 1), got {support_floor!r}")
    if realized.m != r_pred.m:
        raise InvalidParams(f"portfolio is {realized.m}x{realized.m} but prediction is {r_pred.m}x{r_pred.m}")
    return _tilt(realized, gamma * r_pred.entries, support_floor)


def eiitc_update(
    realized: PortfolioMatrix,
    r_pred: ReturnMatrix,
    gamma: float,
    support_floor: float = 0.0,
) -> PortfolioMatrix:
    """Like iitc_update with the exponent divided by the predicted drift growth."""
    _check_gamma(gamma)
    if not (0.0 <= support_floor < 1.0):
        raise InvalidParams(f"support_floor must lie in [0, 1), got {support_floor!r}")
    if realized.m != r_pred.m:
        raise InvalidParams(f"portfolio is {realized.m}x{realized.m} but prediction is {r_pred.m}x{r_pred.m}")
    drift_growth = gross_return(realized, r_pred)
    if drift_growth <= 0.0:
        raise ZeroDiamond(f"predicted growth of the drifted portfolio is {drift_growth!r}, tilt undefined")
    return _tilt(realized, (gamma / drift_growth) * r_pred.entries, support_floor)


def objective_value(
    rule: str,
    psi_next: PortfolioMatrix,
    realized: PortfolioMatrix,
    r_pred: ReturnMatrix,
    gamma: float,
) -> float:
    """Regularized objective each update maximizes over the simplex.

    iitc:  gamma * (psi_next . r_pred) - KL(psi_next || realized)

    eiitc: gamma * (log(realized . r_pred)
                    + sum_ij r_pred_ij * (psi_next_ij - realized_ij) / (realized . r_pred))
           - KL(psi_next || realized)

    The eiitc expression is the first-order expansion of the log growth
    around the drifted weights; expanding there (and not at psi_next)
    is what makes its closed-form maximizer the eiitc_update tilt.
    """
    _check_gamma(gamma)
    if rule not in ("iitc", "eiitc"):
        raise InvalidParams(f"rule must be 'iitc' or 'eiitc', got {rule!r}")
    penalty = relative_entropy(psi_next, realized)
    if rule == "iitc":
        return gamma * gross_return(psi_next, r_pred) - penalty
    drift_growth = gross_return(realized, r_pred)
    next_growth = gross_return(psi_next, r_pred)
    if drift_growth <= 0.0 or next_growth <= 0.0:
        raise ZeroDiamond(
            f"predicted growth must be positive, got {drift_growth!r} for the drifted "
            f"weights and {next_growth!r} for the candidate"
        )
    linear_term = (next_growth - drift_growth) / drift_growth
    return gamma * (math.log(drift_growth) + linear_term) - penalty
