"""Ready-to-run first-order formulations of each market class.

A :class:`FirstOrderProblem` bundles the smoothed objective, the feasible-set
projector, the default start, the smoothing constants and the matching
equilibrium certificate (duality gap and price or utility estimate).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import WrongUtilityClass
from ..market import EquilibriumBounds, MarketInstance, UtilityClass, equilibrium_bounds
from ..metrics import (
    EquilibriumCandidate,
    duality_gap_leontief,
    duality_gap_linear,
    duality_gap_ql,
    leontief_utilities_from_prices,
    recover_prices_linear,
)
from ..objectives import eg_linear_eval, leontief_dual_eval, ql_shmyrev_eval
from ..projections import project_columns, project_rows, project_simplex
from ..trace import Measurement
from .pg import LinesearchParams, Objective, Projector


@dataclass
class FirstOrderProblem:
    inst: MarketInstance
    bounds: EquilibriumBounds
    objective: Objective
    projector: Projector
    x0: np.ndarray
    gap_kind: str
    _measure: Callable
    _candidate: Callable

    @property
    def lipschitz(self) -> float:
        return self.bounds.lipschitz

    @property
    def fixed_stepsize(self) -> float:
        return 1.0 / self.lipschitz

    def linesearch_params(self) -> LinesearchParams:
        return LinesearchParams.for_lipschitz(self.lipschitz)

    def _gamma(self, gamma: float) -> float:
        # FW carries no stepsize; price recovery then uses 1 / L_f
        return gamma if math.isfinite(gamma) and gamma > 0 else self.fixed_stepsize

    def measure(self, x, gamma: float = math.nan) -> Measurement:
        gap, estimate = self._measure(x, self._gamma(gamma))
        return Measurement(gap, gap / self.inst.n, estimate)

    def candidate(self, x, gamma: float = math.nan) -> EquilibriumCandidate:
        return self._candidate(x, self._gamma(gamma))


def _safe_gap(fn, *args) -> float:
    with np.errstate(invalid="ignore", divide="ignore"):
        try:
            gap = fn(*args)
        except ArithmeticError:
            return math.inf
    return gap if not math.isnan(gap) else math.inf


def eg_linear_problem(inst: MarketInstance) -> FirstOrderProblem:
    """Smoothed Eisenberg-Gale over allocations with unit-simplex columns."""
    if inst.utility_class is not UtilityClass.LINEAR:
        raise WrongUtilityClass("EG allocation problem needs a linear market")
    bounds = equilibrium_bounds(inst)

    def objective(x):
        return eg_linear_eval(x, inst, bounds)

    def projector(y):
        return project_columns(y, 1.0)[0]

    def candidate(x, gamma):
        p = recover_prices_linear(x, gamma, objective)
        u = np.einsum("ij,ij->i", inst.values, x)
        return EquilibriumCandidate(prices=p, allocation=np.array(x), utilities=u)

    def measure(x, gamma):
        c = candidate(x, gamma)
        if np.any(c.prices <= 0):
            return math.inf, c.prices
        return _safe_gap(duality_gap_linear, c, inst, "eg"), c.prices

    x0 = np.full((inst.n, inst.m), 1.0 / inst.n)
    return FirstOrderProblem(inst, bounds, objective, projector, x0, "eg", measure, candidate)


def ql_initial_point(inst: MarketInstance, bounds: EquilibriumBounds) -> np.ndarray:
    """``b = delta = B_i / (|J_i| + 1)`` rescaled per item so that prices
    lie in ``[p_lower, p_upper]``; returns the stacked ``[b | delta]``."""
    supp = inst.support
    B = inst.budgets
    share = B / (supp.sum(axis=1) + 1.0)
    b = np.where(supp, share[:, None], 0.0)
    p = b.sum(axis=0)
    target = np.clip(p, bounds.p_lower, bounds.p_upper)
    b = b * (target / p)[None, :]
    spent = b.sum(axis=1)
    over = spent > B
    if np.any(over):
        # fall back: each item is bought at its lower price bound by the
        # buyer attaining that bound, which never exceeds a budget
        v = inst.values
        owner = np.argmax(v * (B / (v.sum(axis=1) + B))[:, None], axis=0)
        b = np.zeros_like(b)
        b[owner, np.arange(inst.m)] = bounds.p_lower
    delta = B - b.sum(axis=1)
    return np.column_stack([b, delta])


def ql_problem(inst: MarketInstance) -> FirstOrderProblem:
    """Smoothed QL-Shmyrev over ``[b | delta]`` with rows on ``B_i * simplex``."""
    if inst.utility_class is not UtilityClass.QUASILINEAR:
        raise WrongUtilityClass("QL problem needs a quasilinear market")
    bounds = equilibrium_bounds(inst)
    m = inst.m
    mask = np.column_stack([inst.support, np.ones(inst.n, dtype=bool)])

    def objective(z):
        return ql_shmyrev_eval(z[:, :m], z[:, m], inst, bounds)

    def projector(y):
        return project_rows(y, inst.budgets, mask)[0]

    def candidate(z, gamma):
        b = np.array(z[:, :m])
        p = b.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            x = np.where(p > 0, b / np.where(p > 0, p, 1.0), 0.0)
        return EquilibriumCandidate(prices=p, allocation=x, bids=b, leftovers=np.array(z[:, m]))

    def measure(z, gamma):
        p = z[:, :m].sum(axis=0)
        return _safe_gap(duality_gap_ql, z[:, :m], z[:, m], inst), p

    x0 = ql_initial_point(inst, bounds)
    return FirstOrderProblem(inst, bounds, objective, projector, x0, "ql_shmyrev", measure, candidate)


def leontief_problem(inst: MarketInstance) -> FirstOrderProblem:
    """Smoothed Leontief dual over prices with ``sum(p) = ||B||_1``."""
    if inst.utility_class is not UtilityClass.LEONTIEF:
        raise WrongUtilityClass("Leontief dual needs a Leontief market")
    bounds = equilibrium_bounds(inst)
    total = inst.total_budget

    def objective(p):
        return leontief_dual_eval(p, inst, bounds)

    def projector(y):
        return project_simplex(y, total).point

    def candidate(p, gamma):
        u = leontief_utilities_from_prices(p, inst)
        return EquilibriumCandidate(
            prices=np.array(p), allocation=u[:, None] * inst.values, utilities=u
        )

    def measure(p, gamma):
        try:
            u = leontief_utilities_from_prices(p, inst)
        except ArithmeticError:
            return math.inf, None
        return _safe_gap(duality_gap_leontief, p, inst), u

    x0 = np.full(inst.m, total / inst.m)
    return FirstOrderProblem(inst, bounds, objective, projector, x0, "leontief", measure, candidate)


def build_problem(inst: MarketInstance) -> FirstOrderProblem:
    builders = {
        UtilityClass.LINEAR: eg_linear_problem,
        UtilityClass.QUASILINEAR: ql_problem,
        UtilityClass.LEONTIEF: leontief_problem,
    }
    if inst.utility_class not in builders:
        raise WrongUtilityClass(f"no first-order formulation for {inst.utility_class.value}")
    return builders[inst.utility_class](inst)
