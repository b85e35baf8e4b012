"""Experiment configuration and runner.

One run per (instance, solver) is continued until every requested threshold
has been met once (or ``max_iters``), and per-threshold counts are read off
its trace. Reference equilibria are computed once per instance and shared.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..errors import FormatError, SolverUnsupported
from ..io import load_instance, parse_key_values, read_text, write_text_atomic
from ..market import (
    BudgetMode,
    Distribution,
    GenerationSpec,
    MarketInstance,
    UtilityClass,
    generate_instance,
    validate_instance,
)
from ..metrics import EquilibriumCandidate, duality_gap_linear, duality_gap_ql
from ..solvers import (
    StepRule,
    build_problem,
    frank_wolfe,
    pg_fixed,
    pg_linesearch,
    proportional_response,
    reference_solve,
)
from ..trace import ConvergenceTrace, Measurement, SolverReport, TerminationSpec

SOLVERS = ("pgls", "pg", "fw", "fw-static", "pr")
SUPPORTED: Dict[UtilityClass, Tuple[str, ...]] = {
    UtilityClass.LINEAR: ("pgls", "pg", "fw", "fw-static", "pr"),
    UtilityClass.QUASILINEAR: ("pgls", "pg", "pr"),
    UtilityClass.LEONTIEF: ("pgls", "pg"),
    UtilityClass.COBB_DOUGLAS: (),
}
PRICE_ERROR = "price_error"
NORMALIZED_GAP = "normalized_gap"


@dataclass
class ExperimentConfig:
    utility: UtilityClass = UtilityClass.LINEAR
    distribution: Distribution = Distribution.UNIFORM
    budget_mode: BudgetMode = field(default_factory=BudgetMode.unit)
    sizes: List[Tuple[int, int]] = field(default_factory=lambda: [(50, 100)])
    solvers: List[str] = field(default_factory=lambda: ["pgls", "pr"])
    price_thresholds: List[float] = field(default_factory=lambda: [1e-2, 1e-3])
    gap_thresholds: List[float] = field(default_factory=list)
    repeats: int = 1
    seed: int = 0
    max_iters: int = 20_000
    reference_gap: float = 1e-10
    instance: Optional[str] = None
    record_time: bool = False
    output_dir: Optional[str] = None

    def __post_init__(self):
        if self.repeats < 1:
            raise FormatError("repeats must be >= 1")
        if self.max_iters < 1:
            raise FormatError("max_iters must be >= 1")
        for s in self.solvers:
            if s not in SOLVERS:
                raise SolverUnsupported(f"unknown solver {s!r}; choose from {', '.join(SOLVERS)}")
        if not self.price_thresholds and not self.gap_thresholds:
            raise FormatError("at least one price or gap threshold is required")
        if any(not t > 0 for t in self.price_thresholds + self.gap_thresholds):
            raise FormatError("thresholds must be positive")
        if self.instance is None and not self.sizes:
            raise FormatError("either sizes or an instance file is required")

    def check_solvers(self, utility: UtilityClass) -> None:
        bad = [s for s in self.solvers if s not in SUPPORTED[utility]]
        if bad:
            raise SolverUnsupported(f"{', '.join(bad)} not available for {utility.value} markets")

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kv = parse_key_values(text)
        known = {
            "utility", "distribution", "budget_mode", "sizes", "solvers", "price_thresholds",
            "gap_thresholds", "repeats", "seed", "max_iters", "reference_gap", "instance",
            "record_time", "out",
        }
        unknown = sorted(set(kv) - known)
        if unknown:
            raise FormatError(f"unknown config keys: {', '.join(unknown)}")
        args = {}
        try:
            if "utility" in kv:
                args["utility"] = UtilityClass.parse(kv["utility"])
            if "distribution" in kv:
                args["distribution"] = Distribution.parse(kv["distribution"])
            if "budget_mode" in kv:
                args["budget_mode"] = BudgetMode.parse(kv["budget_mode"])
            if "sizes" in kv:
                args["sizes"] = parse_sizes(kv["sizes"])
            if "solvers" in kv:
                args["solvers"] = _split(kv["solvers"])
            for key in ("price_thresholds", "gap_thresholds"):
                if key in kv:
                    args[key] = [float(t) for t in _split(kv[key])]
            for key in ("repeats", "seed", "max_iters"):
                if key in kv:
                    args[key] = int(kv[key])
            if "reference_gap" in kv:
                args["reference_gap"] = float(kv["reference_gap"])
            if "instance" in kv:
                args["instance"] = kv["instance"]
            if "record_time" in kv:
                args["record_time"] = _parse_bool(kv["record_time"])
            if "out" in kv:
                args["output_dir"] = kv["out"]
        except ValueError as exc:
            raise FormatError(str(exc)) from None
        return cls(**args)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        cfg = cls.from_text(read_text(path))
        if cfg.instance is not None and not os.path.isabs(cfg.instance):
            cfg.instance = os.path.join(os.path.dirname(os.fspath(path)), cfg.instance)
        return cfg


def _split(text: str) -> List[str]:
    return [t.strip() for t in text.replace(";", ",").split(",") if t.strip()]


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_sizes(text: str) -> List[Tuple[int, int]]:
    """``"50x100, 100x200"`` -> ``[(50, 100), (100, 200)]``."""
    sizes = []
    for item in _split(text):
        parts = item.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"size {item!r} is not of the form NxM")
        sizes.append((int(parts[0]), int(parts[1])))
    return sizes


def instance_seed(base_seed: int, size_index: int, repeat: int) -> int:
    """Independent 64-bit seed per (size, repeat) cell."""
    ss = np.random.SeedSequence([base_seed, size_index, repeat])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class InstanceRecord:
    label: str
    inst: MarketInstance
    seed: Optional[int]
    n: int
    m: int


def experiment_instances(cfg: ExperimentConfig) -> List[InstanceRecord]:
    if cfg.instance is not None:
        inst = validate_instance(load_instance(cfg.instance))
        label = os.path.splitext(os.path.basename(cfg.instance))[0]
        return [InstanceRecord(label, inst, None, inst.n, inst.m)]
    records = []
    for k, (n, m) in enumerate(cfg.sizes):
        for rep in range(cfg.repeats):
            seed = instance_seed(cfg.seed, k, rep)
            spec = GenerationSpec(cfg.distribution, n, m, cfg.budget_mode, seed, cfg.utility)
            label = f"{cfg.utility.value}_{cfg.distribution.value}_{n}x{m}_r{rep}"
            records.append(InstanceRecord(label, generate_instance(spec), seed, n, m))
    return records


def _pr_monitor(inst: MarketInstance) -> Callable:
    m = inst.m

    def monitor(z, gamma):
        if inst.utility_class is UtilityClass.LINEAR:
            p = z.sum(axis=0)
            gap = duality_gap_linear(EquilibriumCandidate(prices=p, bids=z), inst, "shmyrev")
        else:
            p = z[:, :m].sum(axis=0)
            gap = duality_gap_ql(z[:, :m], z[:, m], inst)
        return Measurement(gap, gap / inst.n, p)

    return monitor


def run_solver(solver: str, inst: MarketInstance, term: TerminationSpec,
               record_time: bool = False) -> Tuple[SolverReport, str]:
    """Run one named solver with its default start and parameters.

    Returns the report and the label of the duality gap in its trace.
    """
    if solver not in SUPPORTED[inst.utility_class]:
        raise SolverUnsupported(f"{solver} not available for {inst.utility_class.value} markets")
    if solver == "pr":
        report = proportional_response(inst, term, _pr_monitor(inst), record_time=record_time)
        kind = "shmyrev" if inst.utility_class is UtilityClass.LINEAR else "ql_shmyrev"
        return report, kind
    prob = build_problem(inst)
    if solver == "pgls":
        report = pg_linesearch(prob.objective, prob.projector, prob.x0, prob.linesearch_params(),
                               term, prob.measure, record_time)
    elif solver == "pg":
        report = pg_fixed(prob.objective, prob.projector, prob.x0, prob.fixed_stepsize, term,
                          prob.measure, record_time)
    else:
        rule = StepRule.STATIC if solver == "fw-static" else StepRule.EXACT_LINE
        report = frank_wolfe(prob.objective, prob.x0, term, rule, prob.measure, record_time)
    return report, prob.gap_kind


def _reference_estimate(inst: MarketInstance, ref: EquilibriumCandidate) -> np.ndarray:
    return ref.utilities if inst.utility_class is UtilityClass.LEONTIEF else ref.prices


def first_hit(trace: ConvergenceTrace, kind: str, threshold: float) -> Optional[int]:
    column = "rel_price_error" if kind == PRICE_ERROR else "normalized_gap"
    return trace.first_index(lambda r: getattr(r, column) <= threshold)


@dataclass
class CellResult:
    """Counts to each threshold for one (instance, solver); None if unreached."""

    label: str
    n: int
    m: int
    solver: str
    counts: Dict[Tuple[str, float], Optional[Tuple[int, int]]]
    trace_path: Optional[str] = None


@dataclass
class SummaryRow:
    utility: str
    distribution: str
    budget_mode: str
    n: int
    m: int
    solver: str
    threshold_kind: str
    threshold: float
    mean_iters: float
    stderr_iters: float
    mean_projections: float
    stderr_projections: float


SUMMARY_COLUMNS = list(SummaryRow.__dataclass_fields__)


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    rows: List[SummaryRow]
    cells: List[CellResult]


def _mean_stderr(values: List[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0 or np.isnan(arr).any():
        return math.nan, math.nan
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(arr.size))


def summarize(cfg: ExperimentConfig, cells: List[CellResult], utility: UtilityClass) -> List[SummaryRow]:
    thresholds = [(PRICE_ERROR, t) for t in cfg.price_thresholds]
    thresholds += [(NORMALIZED_GAP, t) for t in cfg.gap_thresholds]
    groups: Dict[Tuple[int, int, str], List[CellResult]] = {}
    for c in cells:
        groups.setdefault((c.n, c.m, c.solver), []).append(c)
    rows = []
    for (n, m, solver) in sorted(groups, key=lambda g: (g[0], g[1], cfg.solvers.index(g[2]))):
        group = groups[(n, m, solver)]
        for kind, thr in thresholds:
            hits = [c.counts[(kind, thr)] for c in group]
            iters = [h[0] if h is not None else math.nan for h in hits]
            projs = [h[1] if h is not None else math.nan for h in hits]
            mi, si = _mean_stderr(iters)
            mp, sp = _mean_stderr(projs)
            rows.append(SummaryRow(
                utility.value, cfg.distribution.value, cfg.budget_mode.label(), n, m, solver,
                kind, thr, mi, si, mp, sp,
            ))
    return rows


def run_experiment(cfg: ExperimentConfig, output_dir: Optional[str] = None) -> ExperimentSummary:
    """Run every (instance, solver) cell and write one trace CSV per cell.

    Traces go to ``<output_dir>/traces`` when an output directory is given.
    Raises :class:`ReferenceDidNotConverge` if a reference solve fails.
    """
    out = output_dir if output_dir is not None else cfg.output_dir
    records = experiment_instances(cfg)
    utility = records[0].inst.utility_class if records else cfg.utility
    cfg.check_solvers(utility)
    if not cfg.solvers:
        return ExperimentSummary(cfg, [], [])
    need_price = bool(cfg.price_thresholds)
    need_gap = bool(cfg.gap_thresholds)
    cells = []
    for rec in records:
        ref = reference_solve(rec.inst, cfg.reference_gap) if need_price else None
        for solver in cfg.solvers:
            term = TerminationSpec(
                max_iters=cfg.max_iters,
                rel_price_error=(
                    (_reference_estimate(rec.inst, ref), min(cfg.price_thresholds)) if need_price else None
                ),
                normalized_gap=min(cfg.gap_thresholds) if need_gap else None,
                require_all=True,
            )
            report, gap_kind = run_solver(solver, rec.inst, term, cfg.record_time)
            report.trace.gap_kind = gap_kind
            counts = {}
            for kind, values in ((PRICE_ERROR, cfg.price_thresholds), (NORMALIZED_GAP, cfg.gap_thresholds)):
                for thr in values:
                    k = first_hit(report.trace, kind, thr)
                    counts[(kind, thr)] = (
                        None if k is None
                        else (report.trace.rows[k].iteration, report.trace.rows[k].cumulative_projections)
                    )
            cell = CellResult(rec.label, rec.n, rec.m, solver, counts)
            if out is not None:
                comments = [
                    f"instance={rec.label}",
                    f"seed={rec.seed if rec.seed is not None else 'file'}",
                    f"solver={solver}",
                    f"gap={gap_kind}",
                    f"termination={report.termination_reason}",
                ]
                path = os.path.join(out, "traces", f"{rec.label}_{solver}.csv")
                write_text_atomic(path, report.trace.to_csv(comments))
                cell.trace_path = path
            cells.append(cell)
    return ExperimentSummary(cfg, summarize(cfg, cells, utility), cells)
