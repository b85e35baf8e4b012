"""Fisher-market instances: representation, validation, generation, bounds.

Values are stored as a dense ``n x m`` float array. Instances read from a
sparse (triplet) file are densified on load; ``support`` exposes the
nonzero pattern so that per-cell work can skip zero valuations.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    FormatError,
    NegativeValue,
    NonpositiveBudget,
    SimplexViolation,
    WrongUtilityClass,
    ZeroColumn,
    ZeroRow,
)

SIMPLEX_TOL = 1e-9
MAX_REPAIR_ROUNDS = 100


class UtilityClass(str, enum.Enum):
    LINEAR = "linear"
    QUASILINEAR = "ql"
    LEONTIEF = "leontief"
    COBB_DOUGLAS = "cobbdouglas"

    @classmethod
    def parse(cls, text: str) -> "UtilityClass":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"quasilinear": "ql", "cd": "cobbdouglas"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise FormatError(f"unknown utility class {text!r}") from None


class Distribution(str, enum.Enum):
    UNIFORM = "uniform"
    EXPONENTIAL = "exponential"
    LOGNORMAL = "lognormal"
    ABS_GAUSSIAN = "absgaussian"

    @classmethod
    def parse(cls, text: str) -> "Distribution":
        key = text.strip().lower().replace("-", "").replace("_", "")
        if key in ("gaussian", "normal"):
            key = "absgaussian"
        try:
            return cls(key)
        except ValueError:
            raise FormatError(f"unknown distribution {text!r}") from None

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        if self is Distribution.UNIFORM:
            return rng.random(size)
        if self is Distribution.EXPONENTIAL:
            return rng.exponential(1.0, size)
        if self is Distribution.LOGNORMAL:
            return rng.lognormal(0.0, 1.0, size)
        return np.abs(rng.standard_normal(size))


@dataclass(frozen=True)
class BudgetMode:
    """``unit`` gives B_i = 1; ``shifted`` gives B_i = offset + scale * |draw|."""

    kind: str = "unit"
    scale: float = 1.0
    offset: float = 0.5

    @classmethod
    def unit(cls) -> "BudgetMode":
        return cls("unit")

    @classmethod
    def random_shifted(cls, scale: float, offset: float) -> "BudgetMode":
        return cls("shifted", float(scale), float(offset))

    @classmethod
    def parse(cls, text: str) -> "BudgetMode":
        parts = text.strip().lower().split(":")
        if parts[0] == "unit" and len(parts) == 1:
            return cls.unit()
        if parts[0] == "shifted" and len(parts) == 3:
            return cls.random_shifted(float(parts[1]), float(parts[2]))
        raise FormatError(f"budget mode must be 'unit' or 'shifted:<scale>:<offset>', got {text!r}")

    def label(self) -> str:
        if self.kind == "unit":
            return "unit"
        return f"shifted:{self.scale!r}:{self.offset!r}"


@dataclass(frozen=True)
class GenerationSpec:
    distribution: Distribution
    n: int
    m: int
    budget_mode: BudgetMode = field(default_factory=BudgetMode.unit)
    seed: int = 0
    utility: UtilityClass = UtilityClass.LINEAR

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")


@dataclass(frozen=True, eq=False)
class MarketInstance:
    """Buyers' values (v, a or lambda depending on the class) and budgets."""

    values: np.ndarray
    budgets: np.ndarray
    utility_class: UtilityClass = UtilityClass.LINEAR

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        budgets = np.array(self.budgets, dtype=float).reshape(-1)
        if values.ndim != 2:
            raise FormatError("values must be a 2-d array")
        if budgets.shape[0] != values.shape[0]:
            raise FormatError(
                f"{budgets.shape[0]} budgets for {values.shape[0]} buyers"
            )
        values.setflags(write=False)
        budgets.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "budgets", budgets)
        object.__setattr__(self, "utility_class", UtilityClass(self.utility_class))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def support(self) -> np.ndarray:
        return self.values > 0

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def total_budget(self) -> float:
        return float(self.budgets.sum())

    @classmethod
    def from_triplets(cls, n, m, rows, cols, vals, budgets, utility_class=UtilityClass.LINEAR):
        values = np.zeros((n, m))
        values[np.asarray(rows, dtype=int), np.asarray(cols, dtype=int)] = vals
        return cls(values, budgets, utility_class)

    def triplets(self):
        rows, cols = np.nonzero(self.values)
        return rows, cols, self.values[rows, cols]

    def __eq__(self, other):
        if not isinstance(other, MarketInstance):
            return NotImplemented
        return (
            self.utility_class == other.utility_class
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.budgets, other.budgets)
        )

    __hash__ = None


def validate_instance(inst: MarketInstance) -> MarketInstance:
    """Return ``inst`` unchanged, or raise naming the first offending index."""
    v, B = inst.values, inst.budgets
    bad = np.flatnonzero(~(B > 0))
    if bad.size:
        raise NonpositiveBudget(bad[0], f"B={B[bad[0]]!r}")
    neg = np.argwhere(~(v >= 0))
    if neg.size:
        raise NegativeValue(neg[0][0], f"entry {tuple(neg[0])} = {v[tuple(neg[0])]!r}")
    rows = np.flatnonzero(~v.any(axis=1))
    if rows.size:
        raise ZeroRow(rows[0])
    cols = np.flatnonzero(~v.any(axis=0))
    if cols.size:
        raise ZeroColumn(cols[0])
    if inst.utility_class is UtilityClass.COBB_DOUGLAS:
        sums = v.sum(axis=1)
        off = np.flatnonzero(np.abs(sums - 1.0) > SIMPLEX_TOL)
        if off.size:
            raise SimplexViolation(off[0], f"row sums to {sums[off[0]]!r}")
    return inst


def generate_instance(spec: GenerationSpec) -> MarketInstance:
    """Draw a nondegenerate instance; identical output for identical ``spec``."""
    rng = np.random.default_rng(spec.seed)
    v = spec.distribution.draw(rng, (spec.n, spec.m))
    for _ in range(MAX_REPAIR_ROUNDS):
        zero_rows = ~v.any(axis=1)
        zero_cols = ~v.any(axis=0)
        if not zero_rows.any() and not zero_cols.any():
            break
        if zero_rows.any():
            v[zero_rows] = spec.distribution.draw(rng, (int(zero_rows.sum()), spec.m))
        if zero_cols.any():
            v[:, zero_cols] = spec.distribution.draw(rng, (spec.n, int(zero_cols.sum())))
    else:
        raise RuntimeError(
            f"could not draw a nondegenerate {spec.n}x{spec.m} instance "
            f"after {MAX_REPAIR_ROUNDS} rounds"
        )

    if spec.budget_mode.kind == "unit":
        budgets = np.ones(spec.n)
    else:
        draws = np.abs(spec.distribution.draw(rng, spec.n))
        budgets = spec.budget_mode.offset + spec.budget_mode.scale * draws

    if spec.utility is UtilityClass.COBB_DOUGLAS:
        v = v / v.sum(axis=1, keepdims=True)
    return validate_instance(MarketInstance(v, budgets, spec.utility))


def spectral_norm(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value of ``a`` by power iteration on a^T a."""
    a = np.asarray(a, dtype=float)
    if a.size == 0 or not a.any():
        return 0.0
    x = np.ones(a.shape[1]) / np.sqrt(a.shape[1])
    sigma = 0.0
    for _ in range(max_iter):
        y = a.T @ (a @ x)
        norm_y = np.linalg.norm(y)
        x = y / norm_y
        new_sigma = np.sqrt(norm_y)
        if abs(new_sigma - sigma) <= tol * new_sigma:
            return float(new_sigma)
        sigma = new_sigma
    return float(sigma)


@dataclass(frozen=True)
class EquilibriumBounds:
    """Bounds on equilibrium quantities and the resulting smoothing moduli.

    Vectors that do not apply to the instance's utility class are ``None``.
    """

    mu: float
    L: float
    op_norm_A: float
    u_lower: Optional[np.ndarray] = None
    u_upper: Optional[np.ndarray] = None
    p_lower: Optional[np.ndarray] = None
    p_upper: Optional[np.ndarray] = None
    r_lower: Optional[np.ndarray] = None
    r_upper: Optional[np.ndarray] = None

    @property
    def lipschitz(self) -> float:
        """Gradient Lipschitz bound L * ||A||^2 of the composite objective."""
        return self.L * self.op_norm_A**2


def equilibrium_bounds(inst: MarketInstance) -> EquilibriumBounds:
    v, B = inst.values, inst.budgets
    total = B.sum()
    cls = inst.utility_class
    if cls is UtilityClass.LINEAR:
        row_l1 = v.sum(axis=1)
        u_lower = B * row_l1 / total
        u_upper = row_l1
        p_lower = (v * (B / row_l1)[:, None]).max(axis=0)
        return EquilibriumBounds(
            mu=float(np.min(B / row_l1**2)),
            L=float(np.max(B / u_lower**2)),
            op_norm_A=float(np.max(np.linalg.norm(v, axis=1))),
            u_lower=u_lower,
            u_upper=u_upper,
            p_lower=p_lower,
            p_upper=np.full(inst.m, total),
        )
    if cls is UtilityClass.QUASILINEAR:
        row_l1 = v.sum(axis=1)
        p_lower = (v * (B / (row_l1 + B))[:, None]).max(axis=0)
        p_upper = v.max(axis=0)
        return EquilibriumBounds(
            mu=float(1.0 / p_upper.max()),
            L=float(1.0 / p_lower.min()),
            # exact norm of b -> (sum_i b_ij)_j: A A^T = n I
            op_norm_A=float(np.sqrt(inst.n)),
            p_lower=p_lower,
            p_upper=p_upper,
        )
    if cls is UtilityClass.LEONTIEF:
        a_inf = v.max(axis=1)
        r_lower = B * a_inf
        r_upper = total * a_inf
        return EquilibriumBounds(
            mu=float(np.min(B / r_upper**2)),
            L=float(np.max(B / r_lower**2)),
            op_norm_A=spectral_norm(v),
            r_lower=r_lower,
            r_upper=r_upper,
        )
    raise WrongUtilityClass(f"no equilibrium bounds defined for {cls.value}")
