"""Closed-form equilibrium of Cobb-Douglas markets."""

from __future__ import annotations

import numpy as np

from ..errors import WrongUtilityClass
from ..market import MarketInstance, UtilityClass


def cobb_douglas_solve(inst: MarketInstance):
    """Each buyer spends the share ``lambda_ij`` of its budget on item j.

    Returns ``(x, p)`` with ``p_j = sum_i B_i lambda_ij`` and
    ``x_ij = B_i lambda_ij / p_j``.
    """
    if inst.utility_class is not UtilityClass.COBB_DOUGLAS:
        raise WrongUtilityClass(f"closed form needs a Cobb-Douglas market, not {inst.utility_class.value}")
    spend = inst.budgets[:, None] * inst.values
    p = spend.sum(axis=0)
    x = np.where(p > 0, spend / np.where(p > 0, p, 1.0), 0.0)
    return x, p
