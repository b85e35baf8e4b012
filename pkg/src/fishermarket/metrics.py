"""Equilibrium certificates: recovered prices, duality gaps, verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    DimensionMismatch,
    MissingField,
    ZeroDotProduct,
    ZeroPrice,
    ZeroUtility,
)
from .market import MarketInstance, UtilityClass
from .objectives import ql_shmyrev_value, shmyrev_linear_value
from .projections import project_columns
from .trace import relative_error


@dataclass
class EquilibriumCandidate:
    prices: np.ndarray
    allocation: Optional[np.ndarray] = None
    bids: Optional[np.ndarray] = None
    leftovers: Optional[np.ndarray] = None
    utilities: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ("prices", "allocation", "bids", "leftovers", "utilities"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, np.asarray(value, dtype=float))


@dataclass(frozen=True)
class VerificationReport:
    max_clearance_violation: float
    max_budget_violation: float
    max_dual_feasibility_violation: float
    max_complementary_slackness: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(
            self.max_clearance_violation,
            self.max_budget_violation,
            self.max_dual_feasibility_violation,
            self.max_complementary_slackness,
        ) <= self.tol


def recover_prices_linear(x, gamma: float, objective) -> np.ndarray:
    """Prices as simplex-projection multipliers of ``x - gamma grad f(x)``, over gamma."""
    x = np.asarray(x, dtype=float)
    _, lam = project_columns(x - gamma * objective(x).gradient, 1.0)
    return lam / gamma


def relative_price_error(p, p_ref) -> float:
    p = np.asarray(p, dtype=float)
    p_ref = np.asarray(p_ref, dtype=float)
    if p.shape != p_ref.shape:
        raise DimensionMismatch(f"prices {p.shape} vs reference {p_ref.shape}")
    return relative_error(p, p_ref)


def kl_divergence(p, q) -> float:
    """Generalised KL divergence ``sum p log(p/q) - sum p + sum q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = p > 0
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])) - p.sum() + q.sum())


def _min_price_per_value(p, inst: MarketInstance) -> np.ndarray:
    v = inst.values
    ratio = np.where(v > 0, p[None, :] / np.where(v > 0, v, 1.0), np.inf)
    return ratio.min(axis=1)


def _dual_value(p, beta, budgets) -> float:
    """``sum p - sum B log beta``, the price/beta dual in minimisation form."""
    with np.errstate(divide="ignore"):
        return float(p.sum() - np.sum(budgets * np.log(beta)))


def duality_gap_linear(candidate: EquilibriumCandidate, inst: MarketInstance, kind: str = "auto") -> float:
    """Duality gap for a linear market.

    ``kind="shmyrev"`` certifies bids (PR iterates) against the price dual
    with ``beta_i = min_j p_j / v_ij``; ``kind="eg"`` certifies an allocation
    with prices against the Eisenberg-Gale dual. ``auto`` picks ``shmyrev``
    whenever bids are present.
    """
    B = inst.budgets
    if kind == "auto":
        kind = "shmyrev" if candidate.bids is not None else "eg"
    if kind == "shmyrev":
        if candidate.bids is None:
            raise MissingField("bids")
        p = candidate.bids.sum(axis=0)
        beta = _min_price_per_value(p, inst)
        # Shmyrev's value uses log v; the dual pairs with (1 + log v), i.e. minus ||B||_1
        primal = shmyrev_linear_value(candidate.bids, inst) - B.sum()
        return primal + _dual_value(p, beta, B)
    if kind != "eg":
        raise ValueError(f"unknown gap kind {kind!r}")
    if candidate.allocation is None:
        raise MissingField("allocation")
    p = candidate.prices
    u = np.einsum("ij,ij->i", inst.values, candidate.allocation)
    zero = np.flatnonzero(u <= 0)
    if zero.size:
        raise ZeroUtility(zero[0])
    beta = _min_price_per_value(p, inst)
    primal = -float(np.sum(B * np.log(u)))
    return primal + _dual_value(p, beta, B) - float(np.sum(B * (1.0 - np.log(B))))


def duality_gap_ql(b, delta, inst: MarketInstance) -> float:
    """QL-Shmyrev value plus the price dual with ``beta_i = min(min_j p_j/v_ij, 1)``."""
    b = np.asarray(b, dtype=float)
    p = b.sum(axis=0)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ZeroPrice(zero[0])
    beta = np.minimum(_min_price_per_value(p, inst), 1.0)
    return ql_shmyrev_value(b, inst) + _dual_value(p, beta, inst.budgets)


def _leontief_dots(p, inst: MarketInstance) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.shape != (inst.m,):
        raise DimensionMismatch(f"prices {p.shape}, expected ({inst.m},)")
    r = inst.values @ p
    zero = np.flatnonzero(r <= 0)
    if zero.size:
        raise ZeroDotProduct(zero[0])
    return r


def leontief_utilities_from_prices(p, inst: MarketInstance) -> np.ndarray:
    """Primal-feasible utilities ``u~ / ||a^T u~||_inf`` with ``u~_i = B_i / <a_i, p>``."""
    r = _leontief_dots(p, inst)
    u_tilde = inst.budgets / r
    return u_tilde / np.max(inst.values.T @ u_tilde)


def duality_gap_leontief(p, inst: MarketInstance) -> float:
    B = inst.budgets
    r = _leontief_dots(p, inst)
    u = leontief_utilities_from_prices(p, inst)
    primal = -float(np.sum(B * np.log(u)))
    dual = -float(np.sum(p)) + float(np.sum(B * np.log(r))) + float(np.sum(B * (1.0 - np.log(B))))
    return primal - dual


def leontief_utilities_from_allocation(x, inst: MarketInstance) -> np.ndarray:
    a = inst.values
    ratio = np.where(a > 0, x / np.where(a > 0, a, 1.0), np.inf)
    return ratio.min(axis=1)


def verify_equilibrium(candidate: EquilibriumCandidate, inst: MarketInstance, tol: float) -> VerificationReport:
    """Check market clearance, budgets, buyer optimality and slackness.

    Clearance is measured in item units. Budget violations are relative to
    B_i. Price-valued violations are divided by the average equilibrium
    price ``||B||_1 / m``. An item counts as positively priced when its
    price exceeds ``tol * ||B||_1 / m``.
    """
    if candidate.allocation is None:
        raise MissingField("allocation")
    if candidate.prices is None:
        raise MissingField("prices")
    x, p = candidate.allocation, candidate.prices
    if x.shape != inst.values.shape or p.shape != (inst.m,):
        raise DimensionMismatch("candidate shapes do not match the instance")
    v, B = inst.values, inst.budgets
    cls = inst.utility_class
    price_scale = B.sum() / inst.m

    supply = x.sum(axis=0)
    clearance = max(float(np.max(supply - 1.0)), 0.0, float(np.max(-x, initial=0.0)))
    priced = p > tol * price_scale
    slack = float(np.max(np.abs(supply[priced] - 1.0), initial=0.0))

    spend = x @ p
    dual = float(np.max(-p, initial=0.0)) / price_scale

    if cls is UtilityClass.LINEAR:
        u = np.einsum("ij,ij->i", v, x)
        beta = B / u
        dual = max(dual, float(np.max(v * beta[:, None] - p[None, :])) / price_scale)
        budget = float(np.max(np.abs(spend - B) / B))
    elif cls is UtilityClass.QUASILINEAR:
        if candidate.leftovers is None:
            raise MissingField("leftovers")
        delta = candidate.leftovers
        u = np.einsum("ij,ij->i", v, x)
        beta = B / (u + delta)
        dual = max(
            dual,
            float(np.max(v * beta[:, None] - p[None, :])) / price_scale,
            float(np.max(beta - 1.0)),
        )
        budget = float(np.max(np.abs(spend + delta - B) / B))
        holds_money = delta > tol * B
        slack = max(slack, float(np.max(1.0 - beta[holds_money], initial=0.0)))
    elif cls is UtilityClass.LEONTIEF:
        u = candidate.utilities
        if u is None:
            u = leontief_utilities_from_allocation(x, inst)
        dual = max(dual, float(np.max(np.abs(u * (v @ p) - B) / B)))
        budget = float(np.max(np.abs(spend - B) / B))
    else:
        # Cobb-Douglas demand spends the share lambda_ij of B_i on item j
        dual = max(dual, float(np.max(np.abs(x * p[None, :] - v * B[:, None]) / B[:, None])))
        budget = float(np.max(np.abs(spend - B) / B))

    return VerificationReport(float(clearance), float(budget), float(max(dual, 0.0)), float(slack), tol)
