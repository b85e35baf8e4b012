import numpy as np
import pytest

from fishermarket.errors import EmptyInput, TooLarge
from fishermarket.hoffman import (
    MAX_ROWS,
    box_constraint_rows,
    hoffman_brute,
    hoffman_spot_check,
    project_box_affine,
)


def test_identity():
    res = hoffman_brute(np.eye(2))
    assert res.value == pytest.approx(1.0)
    assert res.witness == (0,)


def test_diagonal():
    assert hoffman_brute(np.diag([1.0, 2.0])).value == pytest.approx(1.0)


def test_single_row():
    res = hoffman_brute(np.array([[0.5, 0.0]]))
    assert res.value == pytest.approx(2.0)
    assert res.witness == (0,)


def test_witness_attains_value(rng):
    for _ in range(20):
        M = rng.normal(size=(4, 3))
        res = hoffman_brute(M)
        smin = np.linalg.svd(M[list(res.witness)], compute_uv=False)[-1]
        assert res.value == pytest.approx(1.0 / smin, rel=1e-12)


def test_dependent_rows_skipped():
    M = np.array([[1.0, 0.0], [2.0, 0.0]])
    res = hoffman_brute(M)
    # the pair is singular; the best single row is the shorter one
    assert res.value == pytest.approx(1.0)
    assert res.witness == (0,)


def test_scaling(rng):
    for _ in range(20):
        M = rng.normal(size=(4, 3))
        for c in (2.0, 0.5, 3.0):
            assert hoffman_brute(c * M).value == pytest.approx(hoffman_brute(M).value / c, rel=1e-10)


def test_stacking_dominates(rng):
    for _ in range(20):
        A = rng.normal(size=(2, 3))
        C = rng.normal(size=(2, 3))
        h = hoffman_brute(np.vstack([A, C])).value
        smin_a = np.linalg.svd(A, compute_uv=False)[-1]
        assert h >= max(1.0 / smin_a, hoffman_brute(A).value) * (1 - 1e-12)


def test_limits():
    with pytest.raises(TooLarge):
        hoffman_brute(np.ones((MAX_ROWS + 1, 2)))
    with pytest.raises(EmptyInput):
        hoffman_brute(np.zeros((0, 2)))


def test_box_rows():
    np.testing.assert_array_equal(box_constraint_rows(2), [[1, 0], [0, 1], [-1, 0], [0, -1]])


def test_box_affine_projection_is_optimal(rng):
    A = rng.normal(size=(1, 3))
    lo, hi = np.zeros(3), np.ones(3)
    z = A @ rng.uniform(lo, hi)
    x = rng.uniform(-1, 2, size=3)
    proj = project_box_affine(x, A, z, lo, hi)
    np.testing.assert_allclose(A @ proj, z, atol=1e-12)
    assert np.all(proj >= lo - 1e-12) and np.all(proj <= hi + 1e-12)
    # no random feasible point is closer
    base = np.linalg.norm(x - proj)
    for _ in range(2000):
        y = rng.uniform(lo, hi)
        # move y onto the affine set along A's row; keep only feasible results
        y = y - A[0] * (A[0] @ y - z[0]) / (A[0] @ A[0])
        if np.all(y >= lo) and np.all(y <= hi):
            assert np.linalg.norm(x - y) >= base - 1e-12


def test_spot_check_holds(rng):
    for _ in range(10):
        A = rng.normal(size=(2, 3))
        res = hoffman_spot_check(A, np.zeros(3), np.ones(3), rng, samples=20, targets=3)
        assert res.samples > 0
        assert res.holds
