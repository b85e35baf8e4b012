"""Brute-force Hoffman constants and an exact check of the Hoffman inequality
for tiny matrices."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import EmptyInput, TooLarge

MAX_ROWS = 20
RANK_RTOL = 1e-10
# maxima within this relative distance are treated as ties
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class HoffmanResult:
    value: float
    witness: Tuple[int, ...]


def hoffman_brute(M) -> HoffmanResult:
    """``max 1/sigma_min(S)`` over row subsets ``S`` of ``M`` with independent rows.

    Only subsets of at most ``rank(M)`` rows can be independent, so larger
    ones are skipped. Rows count as dependent when the least singular value
    is below ``1e-10 * sigma_max(M)``. Ties go to the lexicographically
    smallest witness.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    k, d = M.shape
    if k == 0 or d == 0:
        raise EmptyInput("matrix has no rows or columns")
    if k > MAX_ROWS:
        raise TooLarge(f"{k} rows exceed the enumeration cap of {MAX_ROWS}")
    sigma_max = float(np.linalg.norm(M, 2))
    if sigma_max == 0.0:
        raise ValueError("H is undefined for the zero matrix")
    cutoff = RANK_RTOL * sigma_max
    best, witness = -np.inf, None
    for size in range(1, min(k, d) + 1):
        for rows in itertools.combinations(range(k), size):
            smin = np.linalg.svd(M[list(rows)], compute_uv=False)[-1]
            if smin <= cutoff:
                continue
            value = 1.0 / smin
            if value > best * (1.0 + TIE_RTOL):
                best, witness = value, rows
            elif value >= best * (1.0 - TIE_RTOL) and rows < witness:
                witness = rows
    return HoffmanResult(float(best), witness)


def box_constraint_rows(d: int) -> np.ndarray:
    """Rows ``[I; -I]`` describing a box ``lower <= x <= upper`` as ``Cx <= c``."""
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def project_box_affine(x, A, z, lower, upper) -> np.ndarray:
    """Exact Euclidean projection onto ``{lower <= y <= upper, A y = z}``.

    Enumerates which coordinates sit at a bound (``3^d`` patterns); on each
    pattern the free coordinates are projected onto the affine slice. The
    best feasible candidate is the projection. Intended for ``d <= 8``.
    """
    x = np.asarray(x, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    z = np.asarray(z, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    d = x.size
    scale = 1.0 + float(np.max(np.abs(z), initial=0.0)) + float(np.abs(A).sum())
    feas_tol = 1e-9 * scale
    best, best_y = np.inf, None
    for pattern in itertools.product((0, 1, 2), repeat=d):
        pat = np.array(pattern)
        y = np.where(pat == 1, lo, np.where(pat == 2, hi, x))
        free = pat == 0
        rhs = z - A[:, ~free] @ y[~free]
        if free.any():
            Af = A[:, free]
            y[free] = x[free] + np.linalg.pinv(Af) @ (rhs - Af @ x[free])
        if np.linalg.norm(A @ y - z) > feas_tol:
            continue
        if np.any(y < lo - feas_tol) or np.any(y > hi + feas_tol):
            continue
        dist = float(np.sum((y - x) ** 2))
        if dist < best:
            best, best_y = dist, np.clip(y, lo, hi)
    if best_y is None:
        raise ValueError("box and affine set do not intersect")
    return best_y


@dataclass(frozen=True)
class HoffmanCheck:
    constant: float
    worst_ratio: float
    samples: int

    @property
    def holds(self) -> bool:
        return self.worst_ratio <= self.constant * (1.0 + 1e-9)


def hoffman_spot_check(A, lower, upper, rng: np.random.Generator, samples: int = 50,
                       targets: int = 5) -> HoffmanCheck:
    """Sample ``x`` in the box and right-hand sides ``z = A x_hat`` and compare
    ``dist(x, box ∩ {Ay = z})`` against ``H([A; I; -I]) * |Ax - z|``.

    Returns the constant and the largest observed ratio distance/residual.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    d = A.shape[1]
    H = hoffman_brute(np.vstack([A, box_constraint_rows(d)])).value
    worst, count = 0.0, 0
    for _ in range(targets):
        z = A @ rng.uniform(lo, hi)
        for _ in range(samples):
            x = rng.uniform(lo, hi)
            resid = float(np.linalg.norm(A @ x - z))
            if resid == 0.0:
                continue
            dist = float(np.linalg.norm(x - project_box_affine(x, A, z, lo, hi)))
            worst = max(worst, dist / resid)
            count += 1
    return HoffmanCheck(H, worst, count)
