import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fishermarket import project_box_simplex, project_product_simplexes, project_simplex
from fishermarket.errors import EmptyInput, InfeasibleBox
from fishermarket.hoffman import project_box_affine
from fishermarket.projections import project_columns, project_rows

from .oracles import mesh_simplex_projection

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 8), elements=finite)


def test_point_on_simplex_is_fixed():
    res = project_simplex(np.array([0.3, 0.3, 0.4]))
    np.testing.assert_allclose(res.point, [0.3, 0.3, 0.4], atol=1e-15)
    assert res.multiplier == pytest.approx(0.0, abs=1e-15)


def test_simple_projections():
    res = project_simplex(np.array([2.0, 0.0]))
    np.testing.assert_array_equal(res.point, [1.0, 0.0])
    assert res.multiplier == 1.0
    res = project_simplex(np.array([0.5, 0.5, 0.5]))
    np.testing.assert_allclose(res.point, [1 / 3] * 3)
    assert res.multiplier == pytest.approx(1 / 6)


def test_empty_and_bad_radius():
    with pytest.raises(EmptyInput):
        project_simplex(np.array([]))
    with pytest.raises(ValueError):
        project_simplex(np.array([1.0]), 0.0)


def test_mesh_oracle_small_batch(rng):
    ys = rng.normal(size=(50, 3)) * 2
    radii = rng.uniform(0.5, 3.0, size=50)
    oracle = mesh_simplex_projection(ys, radii)
    for y, r, xo in zip(ys, radii, oracle):
        np.testing.assert_allclose(project_simplex(y, r).point, xo, atol=1e-10)


@settings(max_examples=200, deadline=None)
@given(y=vectors, radius=st.floats(0.1, 10))
def test_simplex_invariants(y, radius):
    res = project_simplex(y, radius)
    np.testing.assert_array_equal(res.point, np.maximum(y - res.multiplier, 0.0))
    assert res.point.sum() == pytest.approx(radius, rel=1e-12, abs=1e-12)
    again = project_simplex(res.point, radius)
    np.testing.assert_allclose(again.point, res.point, atol=1e-12 * (1 + radius))


@settings(max_examples=200, deadline=None)
@given(y=vectors, data=st.data())
def test_permutation_equivariance(y, data):
    perm = np.array(data.draw(st.permutations(range(y.size))))
    np.testing.assert_allclose(project_simplex(y[perm]).point, project_simplex(y).point[perm], atol=1e-13)


@settings(max_examples=200, deadline=None)
@given(pair=st.integers(1, 8).flatmap(lambda d: st.tuples(
    arrays(np.float64, d, elements=finite), arrays(np.float64, d, elements=finite))))
def test_multiplier_is_l1_lipschitz(pair):
    y1, y2 = pair
    lam1, lam2 = project_simplex(y1).multiplier, project_simplex(y2).multiplier
    assert abs(lam1 - lam2) <= np.abs(y1 - y2).sum() + 1e-12


def test_columns_match_single_projections(rng):
    y = rng.normal(size=(3, 2))
    x, lam = project_product_simplexes(y)
    for j in range(2):
        res = project_simplex(y[:, j])
        np.testing.assert_array_equal(x[:, j], res.point)
        assert lam[j] == pytest.approx(res.multiplier, abs=1e-15)


def test_columns_already_feasible():
    y = np.array([[0.2, 1.0], [0.8, 0.0]])
    x, lam = project_product_simplexes(y)
    np.testing.assert_allclose(x, y, atol=1e-15)
    np.testing.assert_allclose(lam, 0.0, atol=1e-15)


def test_single_buyer_columns():
    y = np.array([[0.3, 2.0, -1.0]])
    x, lam = project_product_simplexes(y)
    np.testing.assert_array_equal(x, np.ones((1, 3)))
    np.testing.assert_allclose(lam, y[0] - 1)


def test_masked_columns_and_rows(rng):
    y = rng.normal(size=(4, 3))
    mask = np.array([[1, 0, 1], [1, 1, 0], [0, 1, 1], [1, 1, 1]], dtype=bool)
    x, _ = project_columns(y, 2.0, mask)
    assert np.all(x[~mask] == 0.0)
    for j in range(3):
        np.testing.assert_allclose(x[mask[:, j], j], project_simplex(y[mask[:, j], j], 2.0).point, atol=1e-14)
    radii = np.array([1.0, 2.0, 3.0, 4.0])
    xr, lam = project_rows(y, radii)
    for i in range(4):
        np.testing.assert_allclose(xr[i], project_simplex(y[i], radii[i]).point, atol=1e-14)
        assert lam[i] == pytest.approx(project_simplex(y[i], radii[i]).multiplier)


def test_box_simplex_examples():
    np.testing.assert_allclose(project_box_simplex([2, 2], [0, 0], [1, 1], 2.0), [1, 1])
    np.testing.assert_allclose(project_box_simplex([0.9, 0.1], [0, 0], [0.5, 1], 1.0), [0.5, 0.5], atol=1e-14)


def test_box_simplex_unbounded_reduces_to_simplex(rng):
    for _ in range(50):
        y = rng.normal(size=5)
        np.testing.assert_allclose(
            project_box_simplex(y, np.zeros(5), np.full(5, np.inf), 1.5),
            project_simplex(y, 1.5).point, atol=1e-13,
        )


def test_box_simplex_infeasible():
    with pytest.raises(InfeasibleBox):
        project_box_simplex([0, 0], [0, 0], [1, 1], 3.0)
    with pytest.raises(InfeasibleBox):
        project_box_simplex([0, 0], [1, 0], [0, 1], 1.0)


def test_box_simplex_matches_active_set_oracle(rng):
    for _ in range(100):
        d = int(rng.integers(1, 5))
        lo = rng.uniform(-1, 0.5, size=d)
        hi = lo + rng.uniform(0.1, 2, size=d)
        r = float(rng.uniform(lo.sum(), hi.sum()))
        y = rng.normal(size=d) * 2
        expected = project_box_affine(y, np.ones((1, d)), np.array([r]), lo, hi)
        np.testing.assert_allclose(project_box_simplex(y, lo, hi, r), expected, atol=1e-10)
