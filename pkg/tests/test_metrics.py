import math

import numpy as np
import pytest

from fishermarket import (
    BudgetMode,
    EquilibriumCandidate,
    MarketInstance,
    TerminationSpec,
    UtilityClass,
    duality_gap_leontief,
    duality_gap_linear,
    duality_gap_ql,
    equilibrium_bounds,
    kl_divergence,
    leontief_utilities_from_prices,
    recover_prices_linear,
    relative_price_error,
    verify_equilibrium,
)
from fishermarket.errors import DimensionMismatch, MissingField, ZeroDotProduct, ZeroUtility
from fishermarket.metrics import leontief_utilities_from_allocation
from fishermarket.objectives import ql_shmyrev_value
from fishermarket.solvers import (
    build_problem,
    cobb_douglas_solve,
    initial_bids_ql,
    md_step_ql,
    reference_solve,
)

from .conftest import random_instance, symmetric


def test_recover_prices_symmetric():
    inst = symmetric()
    prob = build_problem(inst)
    p = recover_prices_linear(np.full((2, 2), 0.5), prob.fixed_stepsize, prob.objective)
    np.testing.assert_allclose(p, [1.0, 1.0], rtol=1e-12)


def test_recover_prices_single_buyer():
    inst = MarketInstance(np.array([[1.0, 3.0, 0.5]]), np.array([2.0]))
    prob = build_problem(inst)
    for gamma in (prob.fixed_stepsize, 0.1):
        p = recover_prices_linear(np.ones((1, 3)), gamma, prob.objective)
        np.testing.assert_allclose(p, 2.0 * inst.values[0] / inst.values[0].sum(), rtol=1e-12)


def test_recover_prices_at_reference_independent_of_stepsize():
    inst = random_instance(UtilityClass.LINEAR, 4, 7, 3)
    ref = reference_solve(inst)
    prob = build_problem(inst)
    for gamma in (prob.fixed_stepsize, 0.5 * prob.fixed_stepsize):
        p = recover_prices_linear(ref.allocation, gamma, prob.objective)
        assert relative_price_error(p, ref.prices) <= 1e-6


def test_relative_price_error_examples():
    p = np.array([1.0, 2.0, 4.0])
    assert relative_price_error(p, p) == 0.0
    assert relative_price_error(1.1 * p, p) == pytest.approx(0.1)
    assert relative_price_error([1.0, 1.0, 4.0], p) == pytest.approx(0.5)
    with pytest.raises(DimensionMismatch):
        relative_price_error([1.0], p)


def test_kl_divergence_basics():
    p = np.array([0.5, 1.5])
    assert kl_divergence(p, p) == 0.0
    assert kl_divergence(p, [1.0, 1.0]) > 0
    assert kl_divergence([0.0, 1.0], [1.0, 1.0]) == pytest.approx(1.0)


def test_linear_gap_zero_at_symmetric_equilibrium():
    inst = symmetric(2, 2)
    cand = EquilibriumCandidate(prices=np.ones(2), allocation=np.full((2, 2), 0.5))
    assert abs(duality_gap_linear(cand, inst)) <= 1e-10
    bids = EquilibriumCandidate(prices=np.ones(2), bids=np.full((2, 2), 0.5))
    assert abs(duality_gap_linear(bids, inst)) <= 1e-10


def test_linear_gaps_nonnegative(rng):
    inst = random_instance(UtilityClass.LINEAR, 4, 6, 9, BudgetMode.random_shifted(1, 0.5))
    for _ in range(100):
        x = rng.dirichlet(np.ones(4), size=6).T
        p = rng.uniform(0.1, 2.0, size=6)
        assert duality_gap_linear(EquilibriumCandidate(prices=p, allocation=x), inst) >= -1e-12
        b = rng.dirichlet(np.ones(6), size=4) * inst.budgets[:, None]
        assert duality_gap_linear(EquilibriumCandidate(prices=b.sum(axis=0), bids=b), inst) >= -1e-12


def test_linear_gap_errors():
    inst = symmetric()
    with pytest.raises(ZeroUtility):
        duality_gap_linear(EquilibriumCandidate(prices=np.ones(2), allocation=np.array([[1.0, 1.0], [0.0, 0.0]])), inst)
    with pytest.raises(MissingField):
        duality_gap_linear(EquilibriumCandidate(prices=np.ones(2)), inst, kind="shmyrev")


def test_ql_gap_nonnegative_and_small_at_reference(rng):
    inst = random_instance(UtilityClass.QUASILINEAR, 5, 10, 4, BudgetMode.random_shifted(5, 5))
    for _ in range(100):
        z = rng.dirichlet(np.ones(11), size=5) * inst.budgets[:, None]
        assert duality_gap_ql(z[:, :10], z[:, 10], inst) >= -1e-12
    ref = reference_solve(inst)
    assert duality_gap_ql(ref.bids, ref.leftovers, inst) <= 1e-9 * inst.n


def test_ql_price_error_bounded_by_gap():
    inst = random_instance(UtilityClass.QUASILINEAR, 6, 12, 5, BudgetMode.random_shifted(5, 5))
    ref = reference_solve(inst)
    p_min = equilibrium_bounds(inst).p_lower.min()
    b, d = initial_bids_ql(inst)
    for _ in range(200):
        b, d = md_step_ql(b, d, inst)
        gap = max(duality_gap_ql(b, d, inst), 0.0)
        assert relative_price_error(b.sum(axis=0), ref.prices) <= math.sqrt(2 * gap) / p_min + 1e-9


def test_ql_price_divergence_sandwich():
    # Pinsker for measures of total mass M: |p - q|_1^2 / (2M) <= D(p|q)
    inst = random_instance(UtilityClass.QUASILINEAR, 6, 12, 6, BudgetMode.random_shifted(5, 5))
    ref = reference_solve(inst)
    phi_star = ql_shmyrev_value(ref.bids, inst)
    b, d = initial_bids_ql(inst)
    for _ in range(200):
        b, d = md_step_ql(b, d, inst)
        p = b.sum(axis=0)
        div = kl_divergence(p, ref.prices)
        mass = max(p.sum(), ref.prices.sum())
        assert 0.5 * np.abs(p - ref.prices).sum() ** 2 / mass <= div + 1e-9
        assert div <= ql_shmyrev_value(b, inst) - phi_star + 1e-9


def test_leontief_single_cell():
    inst = MarketInstance(np.array([[1.0]]), np.array([1.0]), UtilityClass.LEONTIEF)
    np.testing.assert_allclose(leontief_utilities_from_prices([1.0], inst), [1.0])
    assert duality_gap_leontief([1.0], inst) == pytest.approx(0.0, abs=1e-15)


def test_leontief_utilities_feasible_and_gap_nonnegative(rng):
    inst = random_instance(UtilityClass.LEONTIEF, 4, 6, 2, BudgetMode.random_shifted(1, 0.5))
    for _ in range(100):
        p = rng.dirichlet(np.ones(6)) * inst.total_budget
        u = leontief_utilities_from_prices(p, inst)
        assert np.all(inst.values.T @ u <= 1 + 1e-12)
        assert duality_gap_leontief(p, inst) >= -1e-12


def test_leontief_errors():
    inst = MarketInstance(np.array([[1.0, 0.0], [0.0, 1.0]]), np.ones(2), UtilityClass.LEONTIEF)
    with pytest.raises(ZeroDotProduct) as info:
        duality_gap_leontief([1.0, 0.0], inst)
    assert info.value.index == 1
    with pytest.raises(DimensionMismatch):
        leontief_utilities_from_prices([1.0], inst)


def test_leontief_utilities_from_allocation():
    inst = MarketInstance(np.array([[1.0, 2.0]]), np.ones(1), UtilityClass.LEONTIEF)
    np.testing.assert_allclose(leontief_utilities_from_allocation(np.array([[0.5, 0.5]]), inst), [0.25])


def test_verify_symmetric_and_perturbed():
    inst = symmetric(2, 2)
    good = EquilibriumCandidate(prices=np.ones(2), allocation=np.full((2, 2), 0.5))
    assert verify_equilibrium(good, inst, 1e-12).passed
    bad = EquilibriumCandidate(prices=np.array([2.0, 1.0]), allocation=np.full((2, 2), 0.5))
    rep = verify_equilibrium(bad, inst, 1e-6)
    assert not rep.passed
    assert rep.max_budget_violation > 0.1


def test_verify_passed_matches_maxima():
    inst = symmetric(2, 2)
    cand = EquilibriumCandidate(prices=np.array([1.0, 1.0 + 1e-7]), allocation=np.full((2, 2), 0.5))
    rep = verify_equilibrium(cand, inst, 1e-9)
    worst = max(rep.max_clearance_violation, rep.max_budget_violation,
                rep.max_dual_feasibility_violation, rep.max_complementary_slackness)
    assert rep.passed == (worst <= 1e-9)
    assert isinstance(worst, float)


def test_verify_missing_fields():
    inst = symmetric()
    with pytest.raises(MissingField):
        verify_equilibrium(EquilibriumCandidate(prices=np.ones(2)), inst, 1e-6)
    ql = symmetric(2, 2, UtilityClass.QUASILINEAR)
    with pytest.raises(MissingField):
        verify_equilibrium(EquilibriumCandidate(prices=np.ones(2), allocation=np.full((2, 2), 0.5)), ql, 1e-6)


def test_verify_cobb_douglas_closed_form():
    for seed in range(5):
        inst = random_instance(UtilityClass.COBB_DOUGLAS, 4, 6, seed, BudgetMode.random_shifted(1, 0.5))
        x, p = cobb_douglas_solve(inst)
        assert verify_equilibrium(EquilibriumCandidate(prices=p, allocation=x), inst, 1e-12).passed


@pytest.mark.parametrize("utility", [UtilityClass.LINEAR, UtilityClass.QUASILINEAR, UtilityClass.LEONTIEF])
def test_verify_reference_small(utility):
    budget = BudgetMode.random_shifted(5, 5) if utility is UtilityClass.QUASILINEAR else BudgetMode.random_shifted(1, 0.5)
    for seed in range(3):
        inst = random_instance(utility, 5, 10, 100 + seed, budget)
        assert verify_equilibrium(reference_solve(inst, 1e-10), inst, 1e-5).passed
