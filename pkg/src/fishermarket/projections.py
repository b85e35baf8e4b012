"""Euclidean projections onto (scaled, boxed, product) simplexes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InfeasibleBox


@dataclass(frozen=True)
class SimplexProjection:
    point: np.ndarray
    multiplier: float


def project_simplex(y, radius: float = 1.0) -> SimplexProjection:
    """Project ``y`` onto {x >= 0, sum(x) = radius}.

    Returns the point and the unique multiplier ``lam`` with
    ``sum((y - lam)_+) == radius``. Only entries above ``max(y) - radius``
    can be active, so only those are sorted.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise EmptyInput("cannot project an empty vector")
    if not radius > 0:
        raise ValueError("radius must be positive")
    cand = y[y > y.max() - radius]
    # descending by value; equal values are interchangeable so order among ties is irrelevant
    u = np.sort(cand)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, u.size + 1)
    rho = int(np.count_nonzero(u - (css - radius) / k > 0))
    lam = (css[rho - 1] - radius) / rho
    return SimplexProjection(np.maximum(y - lam, 0.0), float(lam))


def project_columns(y: np.ndarray, radius=1.0, mask=None):
    """Project every column of ``y`` onto a simplex of the given radius.

    ``radius`` is a scalar or one value per column. Entries where ``mask``
    is False are excluded from the simplex and come out as exact zeros.
    Returns ``(x, lam)`` with one multiplier per column.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise EmptyInput("cannot project an empty matrix")
    d, k = y.shape
    r = np.broadcast_to(np.asarray(radius, dtype=float), (k,))
    if mask is not None:
        top = np.where(mask, y, -np.inf).max(axis=0)
        y = np.where(mask, y, (top - r - 1.0)[None, :])
    u = -np.sort(-y, axis=0)
    css = np.cumsum(u, axis=0)
    ks = np.arange(1, d + 1)[:, None]
    rho = np.count_nonzero(u - (css - r) / ks > 0, axis=0)
    lam = (css[rho - 1, np.arange(k)] - r) / rho
    x = np.maximum(y - lam, 0.0)
    return x, lam


def project_rows(y: np.ndarray, radius=1.0, mask=None):
    """Row-wise counterpart of :func:`project_columns`."""
    x, lam = project_columns(
        np.asarray(y, dtype=float).T, radius, None if mask is None else np.asarray(mask).T
    )
    return x.T, lam


def project_product_simplexes(x: np.ndarray):
    """Project each column of an ``n x m`` matrix onto the unit simplex."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected an n x m matrix")
    return project_columns(x, 1.0)


def project_box_simplex(y, lower, upper, radius: float = 1.0) -> np.ndarray:
    """Project onto {lower <= x <= upper, sum(x) = radius}.

    Bisection on the shift ``lam`` in ``clip(y - lam, lower, upper)`` followed
    by one exact solve on the free coordinates.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size == 0:
        raise EmptyInput("cannot project an empty vector")
    lo = np.broadcast_to(np.asarray(lower, dtype=float), y.shape)
    hi = np.broadcast_to(np.asarray(upper, dtype=float), y.shape)
    if np.any(lo > hi):
        raise InfeasibleBox("lower bound exceeds upper bound")
    if not (lo.sum() <= radius <= hi.sum()):
        raise InfeasibleBox(f"radius {radius!r} outside [{lo.sum()!r}, {hi.sum()!r}]")

    def total(lam):
        return np.clip(y - lam, lo, hi).sum()

    lam_hi = float(np.max(y - lo))  # total(lam_hi) = sum(lo) <= radius
    finite_hi = np.isfinite(hi)
    if finite_hi.all():
        lam_lo = float(np.min(y - hi))
    else:
        lam_lo = float(np.min(y[~finite_hi] - lo[~finite_hi])) - radius
    tol = 1e-14 * (1.0 + np.max(np.abs(y)))
    for _ in range(200):
        if lam_hi - lam_lo <= tol:
            break
        mid = 0.5 * (lam_lo + lam_hi)
        if total(mid) > radius:
            lam_lo = mid
        else:
            lam_hi = mid
    lam = 0.5 * (lam_lo + lam_hi)

    z = y - lam
    at_lo = z <= lo
    at_hi = z >= hi
    free = ~(at_lo | at_hi)
    if free.any():
        fixed = lo[at_lo].sum() + hi[at_hi].sum()
        lam = (y[free].sum() - (radius - fixed)) / free.sum()
    return np.clip(y - lam, lo, hi)
