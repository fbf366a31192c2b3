"""Report writers: delimited outputs plus rendered figures.

CSV files are the data contract (byte-deterministic for a fixed seed and
plan); the PNG figures rendered alongside them are conveniences for eyeball
checks of the same numbers.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Dict, Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .objective import VarianceCurve
from .simulate import ExperimentReport


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def write_report_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(ExperimentReport.COLUMNS)
        for row in report.rows:
            wr.writerow([_fmt(row[c]) for c in ExperimentReport.COLUMNS])


def write_variance_curve_csv(curve: VarianceCurve, path, scale: float = 1000.0) -> None:
    """Two columns: time, variance x scale (the published plots use x1000)."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["time", f"variance_x{scale:g}"])
        for t, v in curve.to_rows():
            wr.writerow([_fmt(t), _fmt(v * scale if math.isfinite(v) else v)])


def write_are_table_csv(rows: Sequence[dict], path) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for row in rows:
            wr.writerow([_fmt(row.get(c)) for c in cols])


def write_summary(lines: Sequence[str], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# -- figures -------------------------------------------------------------------


def _finite_mask(y):
    y = np.asarray(y, dtype=float)
    return np.isfinite(y)


def variance_comparison_figure(grid, curves: Dict[str, Sequence[float]], path,
                               weight_curve: Optional[Sequence[float]] = None,
                               title: str = "") -> None:
    """Overlay of variance curves (x1000), optionally with the weight on top."""
    grid = np.asarray(grid, dtype=float)
    if weight_curve is not None:
        fig, (ax_w, ax) = plt.subplots(2, 1, figsize=(7, 7), sharex=True,
                                       height_ratios=[1, 2])
        ax_w.plot(grid, weight_curve, color="black")
        ax_w.set_ylabel("weight W(t)")
    else:
        fig, ax = plt.subplots(figsize=(7, 4.6))
    for label, vals in curves.items():
        vals = np.asarray(vals, dtype=float)
        m = _finite_mask(vals)
        ax.plot(grid[m], 1000.0 * vals[m], label=label)
    ax.set_xlabel("time since origin")
    ax.set_ylabel("variance of the survival estimate (x1000)")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def risk_agreement_figure(report: ExperimentReport, path) -> None:
    """Empirical vs theoretical risk sets and variance, one panel each."""
    stats_names = ["y_prevalent", "y_incident", "variance"]
    titles = ["prevalent at risk", "incident at risk", "variance (x1000)"]
    pis = sorted({row["pi"] for row in report.rows})
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    for ax, name, ttl in zip(axes, stats_names, titles):
        scale = 1000.0 if name == "variance" else 1.0
        for pi in pis:
            rows = [r for r in report.rows if r["statistic"] == name and r["pi"] == pi]
            t = np.array([r["t"] for r in rows])
            emp = np.array([r["empirical"] for r in rows]) * scale
            th = np.array([r["theoretical"] for r in rows]) * scale
            order = np.argsort(t)
            line, = ax.plot(t[order], th[order], label=f"theory pi={pi:g}")
            ax.plot(t[order], emp[order], "o", ms=3.5, color=line.get_color())
        ax.set_title(ttl)
        ax.set_xlabel("time")
    axes[0].legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def failure_counts_figure(report: ExperimentReport, path) -> None:
    rows = report.rows
    labels = [f"pi={r['pi']:g}\n{r['statistic'].split('_')[1]}" for r in rows]
    emp = [r["empirical"] for r in rows]
    th = [r["theoretical"] for r in rows]
    x = np.arange(len(rows))
    fig, ax = plt.subplots(figsize=(1.1 * len(rows) + 2, 4))
    ax.bar(x - 0.2, emp, width=0.4, label="empirical")
    ax.bar(x + 0.2, th, width=0.4, label="theoretical")
    ax.set_xticks(x, labels, fontsize=8)
    ax.set_ylabel("mean observed failures")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def power_figure(report: ExperimentReport, path) -> None:
    """Rejection rate against the censor-shape sweep, one line per mix."""
    by_pi: Dict[float, list] = {}
    for r in report.rows:
        c = float(r["statistic"].split("=")[1])
        by_pi.setdefault(r["pi"], []).append((c, r["empirical"]))
    fig, ax = plt.subplots(figsize=(7, 4.6))
    for pi, pts in sorted(by_pi.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"pi={pi:g}")
    flips = report.diagnostics.get("criterion_pi_opt_by_censor_shape", {})
    flipped = [c for c, p in sorted(flips.items()) if p == 1.0]
    if flipped:
        ax.axvline(flipped[0], color="gray", lw=1, ls="--",
                   label="criterion switch to incident")
    ax.set_xlabel("incident censoring Beta shape c")
    ax.set_ylabel("empirical rejection rate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def preview_figure(grid, survival, arrival_cdf, weight, path) -> None:
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for ax, vals, ttl in zip(axes, (survival, arrival_cdf, weight),
                             ("survival S(t)", "arrival cdf H(t)", "weight W(t)")):
        ax.plot(grid, vals, color="black")
        ax.set_title(ttl)
        ax.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
