"""Proportional Response dynamics (mirror descent on Shmyrev-type programs)."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..errors import WrongUtilityClass, ZeroPrice
from ..market import MarketInstance, UtilityClass
from ..objectives import ql_shmyrev_value, shmyrev_linear_value
from ..trace import Monitor, Recorder, SolverReport, TerminationSpec


def _prices(b: np.ndarray) -> np.ndarray:
    p = b.sum(axis=0)
    zero = np.flatnonzero(p <= 0)
    if zero.size:
        raise ZeroPrice(zero[0])
    return p


def pr_step_linear(b, inst: MarketInstance) -> np.ndarray:
    """b_ij <- B_i v_ij x_ij / <v_i, x_i> with x_ij = b_ij / p_j."""
    b = np.asarray(b, dtype=float)
    x = b / _prices(b)
    gain = inst.values * x
    return inst.budgets[:, None] * gain / gain.sum(axis=1, keepdims=True)


def md_step_ql(b, delta, inst: MarketInstance):
    """PR update with leftover budgets; returns ``(b_next, delta_next)``."""
    b = np.asarray(b, dtype=float)
    delta = np.asarray(delta, dtype=float).reshape(-1)
    x = b / _prices(b)
    gain = inst.values * x
    denom = gain.sum(axis=1) + delta
    scale = inst.budgets / denom
    return gain * scale[:, None], delta * scale


def initial_bids_linear(inst: MarketInstance) -> np.ndarray:
    """Each buyer splits its budget evenly over the items it values."""
    supp = inst.support
    return np.where(supp, (inst.budgets / supp.sum(axis=1))[:, None], 0.0)


def initial_bids_ql(inst: MarketInstance):
    """b_ij = delta_i = B_i / (|J_i| + 1) with J_i the items buyer i values."""
    supp = inst.support
    share = inst.budgets / (supp.sum(axis=1) + 1.0)
    return np.where(supp, share[:, None], 0.0), share.copy()


def proportional_response(inst: MarketInstance, term: TerminationSpec,
                          monitor: Optional[Monitor] = None, start=None,
                          record_time: bool = True) -> SolverReport:
    """Run PR for a linear or QL market.

    For linear markets the iterate is the bid matrix; for QL markets it is
    the ``n x (m+1)`` matrix of bids with the leftover column appended. The
    objective column of the trace holds the (unsmoothed) Shmyrev or
    QL-Shmyrev value.
    """
    rec = Recorder(term, monitor, record_time)
    if inst.utility_class is UtilityClass.LINEAR:
        b = initial_bids_linear(inst) if start is None else np.array(start, dtype=float)
        value = lambda z: shmyrev_linear_value(z, inst)  # noqa: E731
        step = lambda z: pr_step_linear(z, inst)  # noqa: E731
    elif inst.utility_class is UtilityClass.QUASILINEAR:
        if start is None:
            bids, left = initial_bids_ql(inst)
            b = np.column_stack([bids, left])
        else:
            b = np.array(start, dtype=float)
        m = inst.m
        value = lambda z: ql_shmyrev_value(z[:, :m], inst)  # noqa: E731

        def step(z):
            nb, nd = md_step_ql(z[:, :m], z[:, m], inst)
            return np.column_stack([nb, nd])
    else:
        raise WrongUtilityClass(f"PR is defined for linear and QL markets, not {inst.utility_class.value}")

    t = 0
    reason = rec.record(t, b, value(b), math.nan)
    while reason is None:
        b = step(b)
        t += 1
        # one PR update counts as one unit of work in the projection column
        reason = rec.record(t, b, value(b), math.nan, projections=1)
    return SolverReport(b, t, rec.projections, rec.trace, reason, 1.0)
