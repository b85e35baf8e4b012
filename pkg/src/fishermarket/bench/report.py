"""Summary tables and plot scripts for experiment results."""

from __future__ import annotations

import csv
import io
import os
from typing import List

from ..io import fmt_float, write_text_atomic
from .experiment import SUMMARY_COLUMNS, ExperimentSummary, SummaryRow

PLOT_TEMPLATE = '''"""Mean +/- standard error versus n for one panel of summary.csv."""

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
KIND = {kind!r}
THRESHOLD = {threshold!r}
TITLE = {title!r}
# PG with linesearch is charged per projection, every other method per iteration
PER_PROJECTION = {{"pgls"}}

series = {{}}
with open(os.path.join(HERE, "summary.csv"), newline="", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        if row["threshold_kind"] != KIND or float(row["threshold"]) != THRESHOLD:
            continue
        solver = row["solver"]
        col = "projections" if solver in PER_PROJECTION else "iters"
        series.setdefault(solver, []).append(
            (int(row["n"]), float(row["mean_" + col]), float(row["stderr_" + col]))
        )

fig, ax = plt.subplots(figsize=(4.5, 3.5))
for solver in sorted(series):
    pts = sorted(series[solver])
    ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[p[2] for p in pts],
                marker="o", capsize=3, label=solver)
ax.set_xlabel("n (buyers)")
ax.set_ylabel("iterations / projections")
ax.set_title(TITLE)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, {image!r}), dpi=100, metadata={{"Software": None}})
'''


def _cell(value) -> str:
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def summary_csv(rows: List[SummaryRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for r in rows:
        writer.writerow([_cell(getattr(r, c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def panel_name(kind: str, threshold: float) -> str:
    return f"plot_{kind}_{threshold:.0e}".replace("+", "").replace("-", "m")


def plot_script(kind: str, threshold: float, utility: str, distribution: str) -> str:
    label = "price error" if kind == "price_error" else "dgap/n"
    title = f"{utility}, {distribution}: {label} <= {threshold:g}"
    name = panel_name(kind, threshold)
    return PLOT_TEMPLATE.format(kind=kind, threshold=threshold, title=title, image=name + ".png")


def emit_report(summary: ExperimentSummary, output_dir) -> List[str]:
    """Write ``summary.csv`` and one plot script per (threshold kind, threshold).

    Raises before writing anything when the summary is empty.
    """
    if not summary.config.solvers:
        raise ValueError("experiment has no solvers; nothing to report")
    if not summary.rows:
        raise ValueError("summary has no rows; nothing to report")
    written = []
    path = os.path.join(os.fspath(output_dir), "summary.csv")
    write_text_atomic(path, summary_csv(summary.rows))
    written.append(path)
    panels = []
    for r in summary.rows:
        key = (r.threshold_kind, r.threshold)
        if key not in panels:
            panels.append(key)
    first = summary.rows[0]
    for kind, thr in panels:
        path = os.path.join(os.fspath(output_dir), panel_name(kind, thr) + ".py")
        write_text_atomic(path, plot_script(kind, thr, first.utility, first.distribution))
        written.append(path)
    return written
