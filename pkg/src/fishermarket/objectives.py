"""Smoothed convex objectives for the three equilibrium programs.

Each program is ``h(A x) + <q, x>`` where ``h`` is a sum of ``-B log``
(linear EG, Leontief dual) or ``p log p`` (QL-Shmyrev) terms. Below a
per-term threshold the term is replaced by its second-order Taylor
polynomial at the threshold, which makes ``h`` globally smooth and
strongly convex on the relevant range without moving the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroPrice
from .market import EquilibriumBounds, MarketInstance


@dataclass(frozen=True)
class SmoothedLogTerm:
    weight: float
    threshold: float


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    gradient: np.ndarray


def smoothed_neg_log(u, weight, threshold):
    """Vectorised ``-weight * log(u)`` glued to a quadratic below ``threshold``."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(weight, dtype=float)
    t = np.asarray(threshold, dtype=float)
    above = u > t
    safe = np.where(above, u, t)
    d = u - t
    quad_val = 0.5 * (w / t**2) * d**2 - (w / t) * d - w * np.log(t)
    quad_der = (w / t**2) * d - w / t
    value = np.where(above, -w * np.log(safe), quad_val)
    deriv = np.where(above, -w / safe, quad_der)
    return value, deriv


def smoothed_log(u: float, term: SmoothedLogTerm):
    """Scalar form of :func:`smoothed_neg_log`; returns ``(value, derivative)``."""
    value, deriv = smoothed_neg_log(u, term.weight, term.threshold)
    return float(value), float(deriv)


def smoothed_entropy(p, threshold):
    """``p log p`` glued to its second-order Taylor polynomial below ``threshold``."""
    p = np.asarray(p, dtype=float)
    t = np.asarray(threshold, dtype=float)
    above = p > t
    safe = np.where(above, p, t)
    d = p - t
    quad_val = t * np.log(t) + (1.0 + np.log(t)) * d + 0.5 * d**2 / t
    quad_der = 1.0 + np.log(t) + d / t
    value = np.where(above, safe * np.log(safe), quad_val)
    deriv = np.where(above, 1.0 + np.log(safe), quad_der)
    return value, deriv


def _check_shape(arr, shape, name):
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} has shape {arr.shape}, expected {shape}")


def eg_linear_eval(x, inst: MarketInstance, bounds: EquilibriumBounds) -> ObjectiveEval:
    """Smoothed Eisenberg-Gale objective over allocations ``x`` (n x m)."""
    x = np.asarray(x, dtype=float)
    _check_shape(x, inst.values.shape, "allocation")
    u = np.einsum("ij,ij->i", inst.values, x)
    val, der = smoothed_neg_log(u, inst.budgets, bounds.u_lower)
    return ObjectiveEval(float(val.sum()), der[:, None] * inst.values)


def ql_coefficients(inst: MarketInstance) -> np.ndarray:
    """``-(1 + log v_ij)`` on the support of v, 0 elsewhere."""
    v = inst.values
    supp = v > 0
    return np.where(supp, -(1.0 + np.log(np.where(supp, v, 1.0))), 0.0)


def ql_shmyrev_eval(b, delta, inst: MarketInstance, bounds: EquilibriumBounds) -> ObjectiveEval:
    """Smoothed QL-Shmyrev objective; gradient is ``n x (m+1)`` with a zero leftover column."""
    b = np.asarray(b, dtype=float)
    delta = np.asarray(delta, dtype=float).reshape(-1)
    _check_shape(b, inst.values.shape, "bids")
    _check_shape(delta, (inst.n,), "leftovers")
    coef = ql_coefficients(inst)
    p = b.sum(axis=0)
    ent_val, ent_der = smoothed_entropy(p, bounds.p_lower)
    value = float(np.sum(coef * b) + ent_val.sum())
    grad = np.zeros((inst.n, inst.m + 1))
    grad[:, : inst.m] = np.where(inst.support, coef + ent_der[None, :], 0.0)
    return ObjectiveEval(value, grad)


def ql_shmyrev_value(b, inst: MarketInstance) -> float:
    """Unsmoothed QL-Shmyrev objective ``-sum (1+log v) b + sum p log p``."""
    b = np.asarray(b, dtype=float)
    _check_shape(b, inst.values.shape, "bids")
    p = b.sum(axis=0)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ZeroPrice(zero[0])
    return float(np.sum(ql_coefficients(inst) * b) + np.sum(p * np.log(p)))


def leontief_dual_eval(p, inst: MarketInstance, bounds: EquilibriumBounds) -> ObjectiveEval:
    """Smoothed ``-sum B_i log <a_i, p>`` over prices."""
    p = np.asarray(p, dtype=float).reshape(-1)
    _check_shape(p, (inst.m,), "prices")
    r = inst.values @ p
    val, der = smoothed_neg_log(r, inst.budgets, bounds.r_lower)
    return ObjectiveEval(float(val.sum()), inst.values.T @ der)


def shmyrev_linear_value(b, inst: MarketInstance) -> float:
    """Shmyrev's program for linear utilities in minimisation form."""
    b = np.asarray(b, dtype=float)
    _check_shape(b, inst.values.shape, "bids")
    p = b.sum(axis=0)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ZeroPrice(zero[0])
    v = inst.values
    logv = np.log(np.where(v > 0, v, 1.0))
    return float(-np.sum(np.where(v > 0, logv * b, 0.0)) + np.sum(p * np.log(p)))
