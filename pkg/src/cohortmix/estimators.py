"""Finite-sample estimators with delayed entry (left truncation).

Kaplan-Meier product-limit with Greenwood variance, the Cox partial-
likelihood score test at zero effect, and the weighted log-rank statistic.
All risk sets are {i : entry_i <= t <= time_i}; at tied times events precede
censorings, and the Cox partial likelihood uses the Breslow tie correction.
Core routines are array-based (the simulator calls them per replication);
record-based wrappers provide the user-facing API and CSV round-trip.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy import stats

Z95 = 1.959963984540054


class DataValidationError(ValueError):
    """Input records violate entry <= time or other structural requirements."""


class UntestableError(ValueError):
    """No events, or the covariate carries no contrast at any event time."""


@dataclass(frozen=True)
class SubjectRecord:
    """One observed subject: delayed entry, observed time, event indicator."""

    entry: float
    time: float
    event: bool
    kind: str = "incident"            # "prevalent" | "incident"
    covariates: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("prevalent", "incident"):
            raise DataValidationError(f"unknown subject kind {self.kind!r}")
        if self.entry > self.time:
            raise DataValidationError(
                f"entry {self.entry} exceeds observed time {self.time}")
        if self.kind == "incident" and self.entry != 0.0:
            raise DataValidationError("incident subjects enter at time zero")


def records_to_arrays(records: Sequence[SubjectRecord]):
    entry = np.array([r.entry for r in records], dtype=float)
    time = np.array([r.time for r in records], dtype=float)
    event = np.array([r.event for r in records], dtype=bool)
    ncov = max((len(r.covariates) for r in records), default=0)
    cov = np.zeros((len(records), ncov))
    for i, r in enumerate(records):
        cov[i, :len(r.covariates)] = r.covariates
    return entry, time, event, cov


@dataclass(frozen=True)
class SurvivalCurve:
    """Product-limit estimate over the distinct event times.

    defined_until is the last time with a positive risk set (the largest
    observed time); evaluate() carries the last value forward past it but
    flags those points as extrapolated. risk_gaps lists interior intervals
    where nobody was at risk (possible under delayed entry).
    """

    event_times: np.ndarray
    estimates: np.ndarray
    greenwood_variance: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    n_risk: np.ndarray
    n_events: np.ndarray
    defined_until: float
    risk_gaps: List[Tuple[float, float]] = field(default_factory=list)

    def evaluate(self, grid, extrapolate: bool = True):
        """Step-function values at grid times; returns (values, extrapolated mask)."""
        grid = np.asarray(grid, dtype=float)
        extr = grid > self.defined_until
        if self.event_times.size == 0:
            vals = np.ones_like(grid)
        else:
            idx = np.searchsorted(self.event_times, grid, side="right")
            vals = np.where(idx == 0, 1.0, self.estimates[np.maximum(idx - 1, 0)])
        if not extrapolate:
            vals = np.where(extr, np.nan, vals)
        return vals, extr

    def variance_at(self, grid):
        grid = np.asarray(grid, dtype=float)
        if self.event_times.size == 0:
            return np.zeros_like(grid)
        idx = np.searchsorted(self.event_times, grid, side="right")
        return np.where(idx == 0, 0.0, self.greenwood_variance[np.maximum(idx - 1, 0)])


def _risk_sets(entry: np.ndarray, time: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Number at risk {entry <= t <= time} at each query time."""
    se = np.sort(entry)
    st = np.sort(time)
    return np.searchsorted(se, at, side="right") - np.searchsorted(st, at, side="left")


def km_fit_arrays(entry: np.ndarray, time: np.ndarray, event: np.ndarray) -> SurvivalCurve:
    if len(time) == 0:
        raise DataValidationError("empty record set")
    if np.any(entry > time):
        raise DataValidationError("entry exceeds observed time for some record")
    et = np.unique(time[event])
    if et.size == 0:
        zero = np.zeros(0)
        return SurvivalCurve(event_times=zero, estimates=zero,
                             greenwood_variance=zero, ci_low=zero, ci_high=zero,
                             n_risk=zero, n_events=zero,
                             defined_until=float(np.max(time)),
                             risk_gaps=_find_gaps(entry, time))
    d = np.zeros(et.size)
    np.add.at(d, np.searchsorted(et, time[event]), 1)
    y = _risk_sets(entry, time, et).astype(float)
    s = np.cumprod(1.0 - d / y)
    with np.errstate(divide="ignore", invalid="ignore"):
        greenwood_terms = np.where(y > d, d / (y * (y - d)), np.inf)
        gw = s * s * np.cumsum(greenwood_terms)
    gw = np.where(np.isnan(gw), np.inf, gw)  # s=0 with inf term
    lo, hi = _loglog_ci(s, gw)
    return SurvivalCurve(
        event_times=et, estimates=s, greenwood_variance=gw,
        ci_low=lo, ci_high=hi, n_risk=y, n_events=d,
        defined_until=float(np.max(time)),
        risk_gaps=_find_gaps(entry, time),
    )


def _loglog_ci(s: np.ndarray, var: np.ndarray):
    """95% complementary log-log interval; degenerate at s in {0, 1}."""
    lo = np.array(s, dtype=float)
    hi = np.array(s, dtype=float)
    ok = (s > 0) & (s < 1) & np.isfinite(var)
    if np.any(ok):
        sv = s[ok]
        se = np.sqrt(var[ok]) / np.abs(sv * np.log(sv))
        theta = np.log(-np.log(sv))
        lo[ok] = np.exp(-np.exp(theta + Z95 * se))
        hi[ok] = np.exp(-np.exp(theta - Z95 * se))
    return lo, hi


def _find_gaps(entry: np.ndarray, time: np.ndarray) -> List[Tuple[float, float]]:
    """Interior intervals with an empty risk set, between first entry and last exit."""
    times = np.concatenate([entry, time])
    steps = np.concatenate([np.ones(len(entry)), -np.ones(len(time))])
    order = np.lexsort((-steps, times))  # entries before exits at tied times
    times = times[order]
    depth = np.cumsum(steps[order])
    idx = np.nonzero(depth[:-1] == 0)[0]
    return [(float(times[i]), float(times[i + 1]))
            for i in idx if times[i + 1] > times[i]]


def km_fit(records: Sequence[SubjectRecord]) -> SurvivalCurve:
    entry, time, event, _ = records_to_arrays(records)
    return km_fit_arrays(entry, time, event)


# -- Cox score test -----------------------------------------------------------


def _event_blocks(entry, time, event, x):
    """Per-distinct-event-time sums needed by the partial likelihood.

    Returns (et, d, sum_x_events, idx sorted helpers) plus closures over the
    risk-set cumulative structure so U and I can be evaluated at any beta.
    """
    et = np.unique(time[event])
    d = np.zeros(et.size)
    np.add.at(d, np.searchsorted(et, time[event]), 1)
    sx_ev = np.zeros(et.size)
    np.add.at(sx_ev, np.searchsorted(et, time[event]), x[event])

    order_e = np.argsort(entry, kind="mergesort")
    order_t = np.argsort(time, kind="mergesort")
    ent_sorted = entry[order_e]
    ext_sorted = time[order_t]
    x_by_entry = x[order_e]
    x_by_exit = x[order_t]
    n_in = np.searchsorted(ent_sorted, et, side="right")
    n_out = np.searchsorted(ext_sorted, et, side="left")

    def risk_sums(beta: float):
        w_in = np.exp(beta * x_by_entry)
        w_out = np.exp(beta * x_by_exit)
        c0_in = np.concatenate([[0.0], np.cumsum(w_in)])
        c1_in = np.concatenate([[0.0], np.cumsum(w_in * x_by_entry)])
        c2_in = np.concatenate([[0.0], np.cumsum(w_in * x_by_entry ** 2)])
        c0_out = np.concatenate([[0.0], np.cumsum(w_out)])
        c1_out = np.concatenate([[0.0], np.cumsum(w_out * x_by_exit)])
        c2_out = np.concatenate([[0.0], np.cumsum(w_out * x_by_exit ** 2)])
        s0 = c0_in[n_in] - c0_out[n_out]
        s1 = c1_in[n_in] - c1_out[n_out]
        s2 = c2_in[n_in] - c2_out[n_out]
        return s0, s1, s2

    return et, d, sx_ev, risk_sums


def cox_score_test(records: Sequence[SubjectRecord], covariate_index: int = 0,
                   estimate_hazard_ratio: bool = True) -> dict:
    """Partial-likelihood score test at beta=0 with delayed-entry risk sets.

    Returns score_statistic (chi-squared, 1 df), p_value, and the Newton
    maximum-partial-likelihood hazard ratio (Breslow ties).
    """
    entry, time, event, cov = records_to_arrays(records)
    if cov.shape[1] <= covariate_index:
        raise UntestableError("covariate index out of range")
    x = cov[:, covariate_index]
    return cox_score_test_arrays(entry, time, event, x, estimate_hazard_ratio)


def cox_score_test_arrays(entry, time, event, x,
                          estimate_hazard_ratio: bool = True) -> dict:
    if not np.any(event):
        raise UntestableError("no events observed")
    et, d, sx_ev, risk_sums = _event_blocks(entry, time, event, x)

    def score_info(beta: float):
        s0, s1, s2 = risk_sums(beta)
        u = float(np.sum(sx_ev - d * s1 / s0))
        info = float(np.sum(d * (s2 / s0 - (s1 / s0) ** 2)))
        return u, info

    u0, i0 = score_info(0.0)
    if i0 <= 0:
        raise UntestableError("covariate is constant within every risk set")
    stat = u0 * u0 / i0
    out = {
        "score_statistic": stat,
        "p_value": float(stats.chi2.sf(stat, 1)),
        "score": u0,
        "information": i0,
    }
    if estimate_hazard_ratio:
        beta = 0.0
        for _ in range(40):
            u, info = score_info(beta)
            if info <= 0:
                break
            step = u / info
            step = max(min(step, 2.0), -2.0)
            beta += step
            if abs(step) < 1e-12:
                break
        out["hazard_ratio_estimate"] = float(np.exp(beta))
        out["log_hazard_ratio"] = float(beta)
    return out


# -- weighted log-rank ---------------------------------------------------------


def weighted_logrank(records: Sequence[SubjectRecord], group_index: int = 0,
                     weight=None) -> dict:
    """Weighted log-rank test for a binary group indicator.

    weight is a function of time (defaults to 1: the ordinary log-rank).
    Statistic = [sum_j w_j (O_1j - E_1j)]^2 / sum_j w_j^2 V_j with the
    hypergeometric variance V_j; reduces to the Cox score test when weights
    are constant and event times are untied.
    """
    entry, time, event, cov = records_to_arrays(records)
    if cov.shape[1] <= group_index:
        raise UntestableError("group index out of range")
    g = cov[:, group_index]
    return weighted_logrank_arrays(entry, time, event, g, weight)


def weighted_logrank_arrays(entry, time, event, g, weight=None) -> dict:
    groups = np.unique(g)
    if groups.size != 2:
        raise UntestableError(f"need exactly two groups, got {groups.size}")
    if not np.any(event):
        raise UntestableError("no events observed")
    x = (g == groups[1]).astype(float)

    et = np.unique(time[event])
    d = np.zeros(et.size)
    np.add.at(d, np.searchsorted(et, time[event]), 1)
    d1 = np.zeros(et.size)
    np.add.at(d1, np.searchsorted(et, time[event]), x[event])

    n_at = _risk_sets(entry, time, et).astype(float)
    # group-1 risk set via the same entered-minus-exited decomposition
    order_e = np.argsort(entry, kind="mergesort")
    order_t = np.argsort(time, kind="mergesort")
    ce = np.concatenate([[0.0], np.cumsum(x[order_e])])
    ct = np.concatenate([[0.0], np.cumsum(x[order_t])])
    n_in = np.searchsorted(entry[order_e], et, side="right")
    n_out = np.searchsorted(time[order_t], et, side="left")
    n1_at = ce[n_in] - ct[n_out]

    w = np.ones(et.size) if weight is None else np.asarray(
        [float(weight(t)) for t in et])
    e1 = d * n1_at / n_at
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(n_at > 1,
                     d * (n1_at / n_at) * (1 - n1_at / n_at) * (n_at - d) / (n_at - 1),
                     0.0)
    num = float(np.sum(w * (d1 - e1)))
    den = float(np.sum(w * w * v))
    if den <= 0:
        raise UntestableError("zero variance: no group contrast at any event time")
    stat = num * num / den
    return {
        "statistic": stat,
        "p_value": float(stats.chi2.sf(stat, 1)),
        "observed_minus_expected": num,
        "variance": den,
    }


# -- CSV schema ----------------------------------------------------------------

def write_records_csv(path, records: Iterable[SubjectRecord]):
    records = list(records)
    ncov = max((len(r.covariates) for r in records), default=0)
    header = ["entry", "time", "event", "kind"] + [f"cov{i+1}" for i in range(ncov)]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in records:
            row = [repr(r.entry), repr(r.time), int(r.event), r.kind]
            row += [repr(c) for c in r.covariates]
            row += [""] * (ncov - len(r.covariates))
            wr.writerow(row)


def read_records_csv(path) -> List[SubjectRecord]:
    out = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header[:4] != ["entry", "time", "event", "kind"]:
            raise DataValidationError(f"unexpected record CSV header: {header}")
        for row in rd:
            covs = tuple(float(v) for v in row[4:] if v != "")
            out.append(SubjectRecord(
                entry=float(row[0]), time=float(row[1]),
                event=bool(int(row[2])), kind=row[3], covariates=covs))
    return out
