"""Proportional transaction costs charged on rebalancing.

The fee is proportional to the cash that actually moves, and the cash
that moves depends on the fee (paying it shrinks every target position),
so the daily cost is the fixed point of a contraction with constant at
most the fee rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CostExceedsCapital,
    InvalidC,
    InvalidParams,
    NoConvergence,
    NonPositiveCapital,
    PreconditionViolation,
)
from .market import ReturnMatrix
from .portfolio import PortfolioMatrix, gross_return, l1_distance

CAPITAL_IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class CostParams:
    """Fee rate and fixed-point iteration controls."""

    c: float
    fp_tol: float = 1e-10
    fp_max_iter: int = 10_000

    def __post_init__(self):
        if not (0.0 <= self.c < 1.0) or not math.isfinite(self.c):
            raise InvalidC(f"fee rate c must lie in [0, 1), got {self.c!r}")
        if self.fp_tol <= 0.0:
            raise InvalidParams(f"fp_tol must be > 0, got {self.fp_tol!r}")
        if self.fp_max_iter < 1:
            raise InvalidParams(f"fp_max_iter must be >= 1, got {self.fp_max_iter!r}")


def turnover(psi_next: PortfolioMatrix, realized: PortfolioMatrix, capital: float) -> float:
    """Absolute cash moved rebalancing drifted weights onto the next targets."""
    if capital <= 0.0 or not math.isfinite(capital):
        raise NonPositiveCapital(f"capital must be finite and > 0, got {capital!r}")
    return capital * l1_distance(psi_next, realized)


def solve_cost_from_drift(
    f_k: float,
    realized_weights: np.ndarray,
    psi_next: PortfolioMatrix,
    params: CostParams,
) -> float:
    """Fixed point of T = c * sum_ij |f_k psi_next_ij - f_k realized_ij - T psi_next_ij|.

    realized_weights are the post-return position weights (they may be a
    carried portfolio on a day with no return).  Starts at T = 0 and
    iterates; the map is a contraction with constant <= c, so the fixed
    point is unique and the iteration converges geometrically.
    """
    if f_k <= 0.0 or not math.isfinite(f_k):
        raise NonPositiveCapital(f"capital must be finite and > 0, got {f_k!r}")
    if params.c == 0.0:
        return 0.0
    w_next = psi_next.weights / psi_next.weights.sum()
    held = f_k * np.asarray(realized_weights, dtype=np.float64)
    target = f_k * w_next
    t = 0.0
    for _ in range(params.fp_max_iter):
        t_new = params.c * float(np.sum(np.abs(target - held - t * w_next)))
        if abs(t_new - t) <= params.fp_tol:
            return t_new
        t = t_new
    raise NoConvergence(
        f"cost fixed point did not move less than {params.fp_tol!r} within {params.fp_max_iter} iterations"
    )


def solve_transaction_cost(
    f_k: float,
    f_prime_k: float,
    psi_k: PortfolioMatrix,
    psi_next: PortfolioMatrix,
    r_k: ReturnMatrix,
    params: CostParams,
) -> float:
    """Daily transaction cost for moving from the day's grown positions to psi_next.

    f_k must equal f_prime_k times the day's growth factor; the grown
    position in pair (i, j) is f_prime_k * psi_k_ij * r_ij.
    """
    if f_prime_k <= 0.0 or not math.isfinite(f_prime_k):
        raise NonPositiveCapital(f"capital after costs must be finite and > 0, got {f_prime_k!r}")
    growth = gross_return(psi_k, r_k)
    expected = f_prime_k * growth
    if abs(f_k - expected) > CAPITAL_IDENTITY_RTOL * max(1.0, abs(f_k), abs(expected)):
        raise PreconditionViolation(
            f"capital identity broken: f_k={f_k!r} but f_prime_k * growth = {expected!r}"
        )
    if growth <= 0.0:
        raise PreconditionViolation(f"day {r_k.day}: growth factor is {growth!r}, positions undefined")
    realized_weights = psi_k.weights * r_k.entries / growth
    return solve_cost_from_drift(f_k, realized_weights, psi_next, params)


def cost_bounds(delta: float, c: float) -> tuple[float, float]:
    """Sandwich for the daily cost: (c/(1+c)) * delta <= T <= (c/(1-c)) * delta."""
    if not (0.0 <= c < 1.0) or not math.isfinite(c):
        raise InvalidC(f"fee rate c must lie in [0, 1), got {c!r}")
    if delta < 0.0:
        raise InvalidParams(f"turnover must be >= 0, got {delta!r}")
    return (c / (1.0 + c)) * delta, (c / (1.0 - c)) * delta


def cost_ratio(t: float, f_prev: float) -> float:
    """Cost as a fraction of the previous day's capital."""
    if f_prev <= 0.0 or not math.isfinite(f_prev):
        raise NonPositiveCapital(f"previous capital must be finite and > 0, got {f_prev!r}")
    if t < 0.0:
        raise InvalidParams(f"cost must be >= 0, got {t!r}")
    if t >= f_prev:
        raise CostExceedsCapital(f"cost {t!r} consumes all of capital {f_prev!r}")
    return t / f_prev


def cost_ratio_bound(rule: str, gamma: float, r_floor: float, c: float) -> float:
    """Worst-case next-day cost ratio when all pair returns lie in [r_floor, 1].

    For the iitc rule the bound is (c/(1-c)) * (exp(gamma*(1-r)) - 1); the
    eiitc rule replaces gamma with gamma/r.  Tight exactly when one
    position carries the floor return and another the ceiling.
    """
    if rule not in ("iitc", "eiitc"):
        raise InvalidParams(f"rule must be 'iitc' or 'eiitc', got {rule!r}")
    if not (0.0 < r_floor < 1.0) or not math.isfinite(r_floor):
        raise InvalidParams(f"return floor must lie in (0, 1), got {r_floor!r}")
    if gamma < 0.0 or not math.isfinite(gamma):
        raise InvalidParams(f"gamma must be >= 0, got {gamma!r}")
    if not (0.0 <= c < 1.0) or not math.isfinite(c):
        raise InvalidC(f"fee rate c must lie in [0, 1), got {c!r}")
    rate = gamma if rule == "iitc" else gamma / r_floor
    return (c / (1.0 - c)) * math.expm1(rate * (1.0 - r_floor))
